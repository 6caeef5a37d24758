"""Single-copy qubit tomography: projective Pauli-type data and its ML estimate.

Each measured basis is a Bloch direction ``n`` with projectors
``(I +- n.sigma) / 2``; data are the ``(+, -)`` counts per basis.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Sequence

import numpy as np
from scipy import optimize

from ..core import I2, PAULIS, bloch_to_density, dagger, density_to_bloch
from ..sampling import as_generator, multinomial_sample
from .apg import Estimate, _ball_map

MUB_DIRECTIONS = np.eye(3)


@dataclasses.dataclass(frozen=True)
class BasisRecord:
    """Counts ``(n_plus, n_minus)`` for a projective measurement along ``direction``."""

    direction: np.ndarray
    n_plus: int
    n_minus: int

    @property
    def total(self) -> int:
        return self.n_plus + self.n_minus


def _projectors(direction) -> np.ndarray:
    ns = np.einsum("a,aij->ij", np.asarray(direction, float), PAULIS)
    return np.array([(I2 + ns) / 2, (I2 - ns) / 2])


def measure_basis(rho: np.ndarray, direction, shots: int, rng) -> BasisRecord:
    proj = _projectors(direction)
    p = np.real(np.einsum("kij,ji->k", proj, rho))
    rec = multinomial_sample(p, shots, rng)
    return BasisRecord(np.asarray(direction, float), int(rec.counts[0]), int(rec.counts[1]))


def _bloch_loglik(signs_dirs, f_seen, r):
    """Log-likelihood and gradient in Bloch coordinates; ``None`` if infeasible."""
    p = (1 + signs_dirs @ r) / 2
    if np.any(p <= 0):
        return None
    return float(f_seen @ np.log(p)), signs_dirs.T @ (f_seen / (2 * p))


def _sphere_polish(signs_dirs, f_seen, r, f_start, max_iters=500):
    s = min(float(np.linalg.norm(r)), 1 - 1e-15)
    z0 = math.atanh(s) * r / np.linalg.norm(r) if s > 0 else np.zeros(3)

    def negative(z):
        rr, jac = _ball_map(z)
        d = _bloch_loglik(signs_dirs, f_seen, rr)
        if d is None:
            return np.inf, np.zeros(3)
        return -d[0], -jac.T @ d[1]

    sol = optimize.minimize(negative, z0, jac=True, method="BFGS",
                            options={"gtol": 1e-13, "maxiter": max_iters})
    best_r, best_f = r, f_start
    candidates = [_ball_map(sol.x)[0], _sphere_max(signs_dirs, f_seen, r, max_iters)]
    for cand in candidates:
        d = _bloch_loglik(signs_dirs, f_seen, cand)
        if d is not None and d[0] > best_f:
            best_r, best_f = cand, d[0]
    return best_r, best_f


def _sphere_max(signs_dirs, f_seen, r, max_iters):
    """Maximise the likelihood over pure states, parametrised by polar angles."""
    u = r / np.linalg.norm(r) if np.linalg.norm(r) > 0 else np.array([0.0, 0.0, 1.0])
    x0 = np.array([math.acos(np.clip(u[2], -1, 1)), math.atan2(u[1], u[0])])

    def point(a):
        st, ct, sp, cp = math.sin(a[0]), math.cos(a[0]), math.sin(a[1]), math.cos(a[1])
        n = np.array([st * cp, st * sp, ct])
        jac = np.array([[ct * cp, -st * sp], [ct * sp, st * cp], [-st, 0.0]])
        return n, jac

    def negative(a):
        n, jac = point(a)
        d = _bloch_loglik(signs_dirs, f_seen, n)
        if d is None:
            return np.inf, np.zeros(2)
        return -d[0], -jac.T @ d[1]

    sol = optimize.minimize(negative, x0, jac=True, method="BFGS",
                            options={"gtol": 1e-13, "maxiter": max_iters})
    return point(sol.x)[0]


def ml_qubit_linear(records: Sequence[BasisRecord], max_iters: int = 500,
                    tol: float = 1e-13, p_floor: float = 1e-300,
                    polish_margin: float = 1e-2) -> Estimate:
    """Iterative RrhoR maximum-likelihood estimate from projective qubit data.

    The update ``rho <- R rho R / tr(R rho R)`` with
    ``R = sum_k (n_k / N) Pi_k / p_k`` is used when it raises the
    log-likelihood; otherwise the diluted operator ``(I + t R) / (1 + t)`` is
    tried with ``t`` halving until it does.
    """
    directions = np.array([r.direction for r in records], dtype=float)
    if np.linalg.matrix_rank(directions, tol=1e-9) < 3:
        raise ValueError("need three linearly independent measurement directions")
    proj = np.concatenate([_projectors(r.direction) for r in records])
    counts = np.array([[r.n_plus, r.n_minus] for r in records], dtype=float).ravel()
    freqs = counts / counts.sum()
    seen = freqs > 0
    proj_seen, f_seen = proj[seen], freqs[seen]
    signs_dirs = np.concatenate([[d, -d] for d in directions])[seen]

    def probabilities(rho):
        return np.real(np.einsum("kij,ji->k", proj_seen, rho))

    def loglik(p):
        return -math.inf if np.any(p <= 0) else float(f_seen @ np.log(p))

    def rrr_step(rho, p, f_cur):
        r_op = np.einsum("k,kij->ij", f_seen / np.maximum(p, p_floor), proj_seen)
        t = math.inf
        while True:
            op = r_op if math.isinf(t) else (I2 + t * r_op) / (1 + t)
            cand = op @ rho @ dagger(op)
            cand = (cand + dagger(cand)) / 2
            cand /= np.trace(cand).real
            p_cand = probabilities(cand)
            f_cand = loglik(p_cand)
            if f_cand >= f_cur:
                return cand, p_cand, f_cand
            t = 1.0 if math.isinf(t) else t / 2
            if t < 1e-12:
                return rho, p, f_cur

    rho = I2 / 2
    p = probabilities(rho)
    f_cur = loglik(p)
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        rho, p, f_new = rrr_step(rho, p, f_cur)
        gain, f_cur = f_new - f_cur, f_new
        if gain < tol:
            converged = True
            break
    r = density_to_bloch(rho)
    if 1 - np.linalg.norm(r) < polish_margin or not converged:
        r, f_cur = _sphere_polish(signs_dirs, f_seen, r, f_cur)
        rho = bloch_to_density(r)
        p = probabilities(rho)
        # a further RrhoR step gaining almost nothing certifies stationarity
        _, _, f_check = rrr_step(rho, p, f_cur)
        converged = f_check - f_cur < 1e-9
    return Estimate(rho, it, f_cur, converged)


def even_split(n: int, parts: int = 3) -> list[int]:
    """Split ``n`` shots as evenly as possible; the remainder goes to earlier parts."""
    base, extra = divmod(n, parts)
    return [base + (1 if k < extra else 0) for k in range(parts)]


def mub_records(rho: np.ndarray, n: int, rng, frame: np.ndarray = MUB_DIRECTIONS) -> list[BasisRecord]:
    gen = as_generator(rng)
    return [measure_basis(rho, d, k, gen) for d, k in zip(frame, even_split(n)) if k > 0]


def mub_protocol(state: np.ndarray, n: int, rng) -> Estimate:
    """Standard sigma_x, sigma_y, sigma_z tomography with ``n`` copies split evenly."""
    if n < 3:
        raise ValueError("MUB tomography needs at least 3 copies")
    return ml_qubit_linear(mub_records(state, n, rng))


def aligned_frame(bloch) -> np.ndarray:
    """Orthonormal frame whose last axis is along ``bloch`` (standard frame if ~0)."""
    b = np.asarray(bloch, float)
    norm = np.linalg.norm(b)
    if norm < 1e-12:
        return MUB_DIRECTIONS.copy()
    z = b / norm
    helper = np.eye(3)[np.argmin(np.abs(z))]
    x = np.cross(helper, z)
    x /= np.linalg.norm(x)
    y = np.cross(z, x)
    return np.array([x, y, z])


def adaptive_two_step_protocol(state: np.ndarray, n: int, rng) -> Estimate:
    """Two-step adaptive tomography.

    The first ``ceil(n/2)`` copies go to standard MUB tomography; the rest are
    measured in a MUB frame rotated so that one basis is the eigenbasis of the
    first estimate. The final estimate is ML on all data pooled.
    """
    if n < 6:
        raise ValueError("adaptive tomography needs at least 6 copies")
    gen = as_generator(rng)
    n1 = (n + 1) // 2
    first = mub_records(state, n1, gen)
    rho1 = ml_qubit_linear(first)
    frame = aligned_frame(rho1.bloch)
    second = mub_records(state, n - n1, gen, frame)
    return ml_qubit_linear(first + second)
