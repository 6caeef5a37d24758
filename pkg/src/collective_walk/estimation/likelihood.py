"""Normalised log-likelihood of multinomial outcome data and its gradient."""

from __future__ import annotations

import dataclasses

import numpy as np

from .. import tolerances
from ..povm import Povm
from ..sampling import MeasurementRecord


@dataclasses.dataclass(frozen=True)
class LogLikelihood:
    value: float
    gradient: np.ndarray


def log_likelihood(state: np.ndarray, record: MeasurementRecord, povm: Povm,
                   p_floor: float | None = None) -> LogLikelihood:
    """``F = sum_j f_j ln p_j`` and ``G = sum_j (f_j / p_j) E_j``.

    ``p_j = tr(state E_j)`` is clamped below by ``p_floor``; outcomes with
    zero counts do not contribute. ``record`` may be a frequency vector.
    """
    f = record.frequencies if isinstance(record, MeasurementRecord) else np.asarray(record, float)
    if len(f) != len(povm):
        raise ValueError("record and POVM have different numbers of outcomes")
    p_floor = tolerances.get().p_floor if p_floor is None else p_floor
    p = np.maximum(np.real(np.einsum("kij,ji->k", povm.effects, state)), p_floor)
    seen = f > 0
    value = float(np.sum(f[seen] * np.log(p[seen])))
    grad = np.einsum("k,kij->ij", f / p, povm.effects)
    return LogLikelihood(value, (grad + grad.conj().T) / 2)
