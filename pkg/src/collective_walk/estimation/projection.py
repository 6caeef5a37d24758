"""Hilbert-Schmidt projection of a two-qubit operator onto two-copy states.

Writing the qubit state as ``rho = (I + r.sigma) / 2`` and the two-qubit input
in the Pauli basis ``X = 1/4 sum c_{mn} sigma_m (x) sigma_n``, the squared
distance ``||X - rho (x) rho||^2`` equals, up to an r-independent constant,

    f(r) / 4  with  f(r) = |r|^4 + 2|r|^2 - 2 v.r - 2 r^T M r,

where ``v_a = c_{a0} + c_{0a}`` and ``M`` is the symmetric part of the
correlation block ``c_{ab}``. The global minimiser over the unit ball solves
``(lam I - M) r = v / 2`` with ``lam >= max eig(M)``, which reduces to a
one-dimensional secular equation in ``lam``.
"""

from __future__ import annotations

import numpy as np
from scipy import optimize

from ..core import I2, PAULIS, tensor

PAULI4 = np.array([I2, *PAULIS])
# PAULI2Q[m, n] = sigma_m (x) sigma_n
PAULI2Q = np.einsum("mij,nkl->mnikjl", PAULI4, PAULI4).reshape(4, 4, 4, 4)


def pauli_coefficients(x: np.ndarray) -> np.ndarray:
    """Real 4x4 array ``c[m, n] = Re tr(X sigma_m (x) sigma_n)``."""
    return np.real(np.einsum("mnij,ji->mn", PAULI2Q, x))


def from_pauli_coefficients(c: np.ndarray) -> np.ndarray:
    return np.einsum("mn,mnij->ij", c, PAULI2Q) / 4


def two_copy_coefficients(r: np.ndarray) -> np.ndarray:
    a = np.concatenate(([1.0], r))
    return np.outer(a, a)


def projection_objective(x: np.ndarray, rho: np.ndarray) -> float:
    """``||x - rho (x) rho||_HS^2`` evaluated directly on matrices."""
    d = x - tensor(rho, rho)
    return float(np.real(np.vdot(d, d)))


def _reduced_problem(c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    v = c[1:, 0] + c[0, 1:]
    corr = c[1:, 1:]
    return v, (corr + corr.T) / 2


def reduced_objective(r: np.ndarray, v: np.ndarray, m: np.ndarray) -> float:
    n2 = r @ r
    return float(n2 * n2 + 2 * n2 - 2 * v @ r - 2 * r @ m @ r)


def _descending_root(func, x_hi):
    """Root of a function increasing in x on (0, x_hi]; None if func(0+) >= 0."""
    x_lo = x_hi
    while func(x_lo) >= 0:
        x_lo *= 1e-3
        if x_lo < 1e-280:
            return None
    if x_lo == x_hi:
        return x_hi
    return optimize.brentq(func, x_lo, x_hi, xtol=1e-300, rtol=4 * np.finfo(float).eps,
                           maxiter=500)


def solve_ball(v: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Global minimiser of ``|r|^4 + 2|r|^2 - 2 v.r - 2 r^T m r`` over ``|r| <= 1``."""
    evals, evecs = np.linalg.eigh(m)
    evals, evecs = evals[::-1], evecs[:, ::-1]
    w = evecs.T @ v / 2
    top = evals[0]
    gaps = top - evals                      # >= 0, zero for the top eigenspace
    wn = float(np.linalg.norm(w))

    nz = w != 0

    def psi(x):                             # |r|^2 at lam = top + x
        return float(np.sum(w[nz] ** 2 / (x + gaps[nz]) ** 2))

    def assemble(x, t_sq):
        with np.errstate(divide="ignore", invalid="ignore"):
            y = np.where(x + gaps > 0, w / (x + gaps), 0.0)
        if t_sq > 0:
            y[0] = np.sqrt(t_sq)
        return evecs @ y

    # interior stationary point: lam - 1 = psi(lam)
    x_hi = max(top, 1.0) + 1.0 + wn - top
    x = _descending_root(lambda x: top + x - 1 - psi(x), x_hi)
    if x is None:                            # hard case: lam = top
        x, t_sq = 0.0, top - 1 - _psi_rest(w, gaps)
    else:
        t_sq = 0.0
    r = assemble(x, max(t_sq, 0.0))
    if r @ r <= 1.0:
        return r
    # boundary: |r(lam)| = 1
    x = _descending_root(lambda x: 1 - psi(x), wn + 1e-300) if wn > 0 else None
    if x is None:
        x, t_sq = 0.0, 1 - _psi_rest(w, gaps)
    else:
        t_sq = 0.0
    r = assemble(x, max(t_sq, 0.0))
    norm = np.linalg.norm(r)
    return r / norm if norm > 0 else r


def _psi_rest(w, gaps):
    mask = gaps > 0
    return float(np.sum(w[mask] ** 2 / gaps[mask] ** 2))


def project_bloch(c: np.ndarray) -> np.ndarray:
    """Bloch vector of the projection, from Pauli coefficients ``c``."""
    return solve_ball(*_reduced_problem(c))


def project_two_copy(x: np.ndarray) -> np.ndarray:
    """Qubit state ``rho`` minimising ``||x - rho (x) rho||_HS`` over all states."""
    r = project_bloch(pauli_coefficients(np.asarray(x, dtype=complex)))
    return (I2 + np.einsum("a,aij->ij", r, PAULIS)) / 2
