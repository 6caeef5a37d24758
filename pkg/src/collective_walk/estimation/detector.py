"""Maximum-likelihood detector (measurement) tomography.

Known probe states ``rho_i`` are sent into an unknown measurement and the
outcome counts ``n_ij`` recorded. The effects are reconstructed by the
symmetric Lagrange-operator iteration

    E_j <- lam^{-1/2} R_j E_j R_j lam^{-1/2},   lam = sum_j R_j E_j R_j,
    R_j = sum_i (f_ij / p_ij) rho_i,

which keeps the effects positive and complete at every sweep.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from typing import Sequence

import numpy as np

from ..core import I2, PAULIS, dagger, tensor
from ..errors import SingularInput, ShapeMismatch
from ..povm import Povm
from ..sampling import MeasurementRecord


@dataclasses.dataclass(frozen=True)
class DetectorEstimate:
    povm: Povm
    iterations: int
    final_loglik: float
    converged: bool


def pauli_eigenstates() -> list[np.ndarray]:
    """The six qubit states along +-x, +-y, +-z (in that order)."""
    return [(I2 + sign * p) / 2 for p in PAULIS for sign in (1, -1)]


def pauli_product_inputs() -> list[np.ndarray]:
    """All 36 two-qubit products of Pauli eigenstates; informationally complete."""
    six = pauli_eigenstates()
    return [tensor(a, b) for a, b in itertools.product(six, six)]


def _inv_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((m + dagger(m)) / 2)
    return (v / np.sqrt(w)) @ dagger(v)


def _psd_part(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((m + dagger(m)) / 2)
    return (v * np.clip(w, 0, None)) @ dagger(v)


def _normalize(effects: np.ndarray) -> np.ndarray:
    s = _inv_sqrt(effects.sum(axis=0))
    out = s @ effects @ s
    return (out + np.conj(np.swapaxes(out, 1, 2))) / 2


def _count_matrix(records, k_outcomes: int) -> np.ndarray:
    rows = []
    for rec in records:
        counts = rec.counts if isinstance(rec, MeasurementRecord) else np.asarray(rec, float)
        if len(counts) != k_outcomes:
            raise ShapeMismatch("every record needs one count per outcome")
        rows.append(np.asarray(counts, float))
    counts = np.array(rows)
    if np.any(counts < 0) or counts.sum() <= 0:
        raise ValueError("counts must be non-negative and not all zero")
    return counts


def detector_tomography(inputs: Sequence[np.ndarray], records: Sequence, k_outcomes: int,
                        max_iters: int = 5000, tol: float = 1e-14,
                        labels: Sequence[str] = ()) -> DetectorEstimate:
    """Reconstruct a ``k_outcomes`` POVM from probe states and outcome counts.

    ``records`` holds a :class:`MeasurementRecord` or a non-negative weight
    vector (e.g. exact probabilities) per input. The iteration starts from
    the positive part of the least-squares inversion, made complete, and
    falls back to a damped update whenever a full step would lower the
    log-likelihood, so the likelihood never decreases.

    Raises
    ------
    SingularInput
        If the probe states do not span the operator space.
    """
    rhos = np.array([np.asarray(r, dtype=complex) for r in inputs])
    if rhos.ndim != 3:
        raise ShapeMismatch("inputs must be square matrices")
    n_in, d, _ = rhos.shape
    if len(records) != n_in:
        raise ShapeMismatch("one record per input state is required")
    design = rhos.reshape(n_in, d * d)
    if np.linalg.matrix_rank(design, tol=1e-9) < d * d:
        raise SingularInput(f"{n_in} input states do not span the {d * d}-dimensional operator space")
    counts = _count_matrix(records, k_outcomes)
    weights = counts / counts.sum()
    seen = weights > 0

    def probabilities(effects):
        return np.real(np.einsum("iab,jba->ij", rhos, effects))

    def loglik(p):
        if np.any(p[seen] <= 0):
            return -math.inf
        return float(weights[seen] @ np.log(p[seen]))

    # warm start: least squares on tr(rho_i E_j) = n_ij / N_i
    freqs = counts / counts.sum(axis=1, keepdims=True)
    sol = np.linalg.lstsq(np.conj(design), freqs, rcond=None)[0]
    ls = np.array([_psd_part(sol[:, j].reshape(d, d).T) for j in range(k_outcomes)])
    effects, f_cur = None, -math.inf
    for mix in (0.0, 1e-12, 1e-9, 1e-6, 1e-3, 1e-1, 1.0):
        cand = _normalize((1 - mix) * ls + mix * np.eye(d) / k_outcomes)
        f_cand = loglik(probabilities(cand))
        if f_cand > -math.inf:
            effects, f_cur = cand, f_cand
            break

    p = probabilities(effects)
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        ratio = np.where(seen, weights / np.where(seen, p, 1), 0.0)
        r_ops = np.einsum("ij,iab->jab", ratio, rhos)
        t = math.inf
        while True:
            ops = r_ops if math.isinf(t) else (np.eye(d) + t * r_ops) / (1 + t)
            cand = _normalize(ops @ effects @ np.conj(np.swapaxes(ops, 1, 2)))
            p_cand = probabilities(cand)
            f_cand = loglik(p_cand)
            if f_cand >= f_cur:
                break
            t = 1.0 if math.isinf(t) else t / 2
            if t < 1e-12:
                cand, p_cand, f_cand = effects, p, f_cur
                break
        gain = f_cand - f_cur
        effects, p, f_cur = cand, p_cand, f_cand
        if gain < tol:
            converged = True
            break
    return DetectorEstimate(Povm(effects, tuple(labels), validate=False), it, f_cur, converged)
