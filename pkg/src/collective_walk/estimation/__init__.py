"""Estimators and precision bounds."""

from .apg import ApgConfig, Estimate, apg_estimate
from .bounds import S_STAR, BoundsReport, bounds_report, collective_bounds, gm_bounds
from .detector import DetectorEstimate, detector_tomography, pauli_eigenstates, pauli_product_inputs
from .likelihood import LogLikelihood, log_likelihood
from .projection import project_bloch, project_two_copy, projection_objective
from .qubit_ml import (BasisRecord, adaptive_two_step_protocol, even_split, measure_basis,
                       ml_qubit_linear, mub_protocol)

__all__ = [
    "ApgConfig", "Estimate", "apg_estimate",
    "S_STAR", "BoundsReport", "bounds_report", "collective_bounds", "gm_bounds",
    "DetectorEstimate", "detector_tomography", "pauli_eigenstates", "pauli_product_inputs",
    "LogLikelihood", "log_likelihood",
    "project_bloch", "project_two_copy", "projection_objective",
    "BasisRecord", "adaptive_two_step_protocol", "even_split", "measure_basis",
    "ml_qubit_linear", "mub_protocol",
]
