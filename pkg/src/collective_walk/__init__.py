"""Collective two-copy qubit tomography realised by a discrete quantum walk.

Submodules
----------
core        linear algebra on density operators, fidelities, Bloch vectors
povm        POVMs, the collective SIC-POVM and POVM fidelity
walk        the coined walk whose position readout realises the POVM
optics      wave-plate Jones calculus and state preparation
sampling    seeded multinomial sampling
estimation  APG maximum likelihood, single-copy ML, detector tomography, bounds
harness     repeated experiments, power-law fits, CSV output
"""

from .core import bloch_to_density, density_to_bloch, state_fidelity
from .povm import Povm, collective_sic_povm, povm_fidelity
from .walk import collective_sic_schedule, extract_induced_povm, run_walk

__version__ = "0.1.0"

__all__ = [
    "bloch_to_density", "density_to_bloch", "state_fidelity",
    "Povm", "collective_sic_povm", "povm_fidelity",
    "collective_sic_schedule", "extract_induced_povm", "run_walk",
]
