"""Numerical tolerances shared by every module.

All thresholds live here so they can be tightened or relaxed in one place::

    from collective_walk import tolerances
    with tolerances.override(psd_floor=-1e-9):
        ...
"""

from __future__ import annotations

import contextlib
import dataclasses


@dataclasses.dataclass
class Tolerances:
    matrix_atol: float = 1e-12       # default entrywise equality
    hermitian_atol: float = 1e-9     # psd_sqrt rejects larger asymmetry
    psd_floor: float = -1e-10        # eigenvalues above this are clamped to 0
    psd_reject: float = -1e-8        # eigenvalues below this are an error
    trace_atol: float = 1e-12
    bloch_atol: float = 1e-12
    povm_atol: float = 1e-10         # effect PSD-ness and completeness
    prob_slack: float = 1e-10        # silent renormalisation window
    prob_reject: float = 1e-8        # larger normalisation errors raise
    zero_trace: float = 1e-12
    leak_atol: float = 1e-8          # induced-POVM completeness check
    p_floor: float = 1e-12           # probability clamp inside log-likelihoods


_current = Tolerances()


def get() -> Tolerances:
    return _current


@contextlib.contextmanager
def override(**changes):
    """Temporarily replace some tolerances (not thread-safe)."""
    global _current
    saved = _current
    _current = dataclasses.replace(saved, **changes)
    try:
        yield _current
    finally:
        _current = saved
