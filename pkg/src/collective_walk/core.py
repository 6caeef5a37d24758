"""Small dense complex linear algebra and qubit state helpers.

States and operators are plain numpy arrays: kets are 1-D complex vectors,
density operators and effects are square complex matrices.
"""

from __future__ import annotations

import numpy as np

from . import tolerances
from .errors import (BlochOutOfBall, DimensionMismatch, NotHermitian,
                     NotNormalized, NotPsd)

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = np.array([SIGMA_X, SIGMA_Y, SIGMA_Z])

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
SINGLET = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)


def tensor(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of any number of vectors or matrices."""
    out = np.asarray(ops[0])
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op))
    return out


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def projector(ket: np.ndarray) -> np.ndarray:
    ket = np.asarray(ket, dtype=complex)
    return np.outer(ket, ket.conj())


def is_hermitian(m: np.ndarray, atol: float | None = None) -> bool:
    atol = tolerances.get().matrix_atol if atol is None else atol
    return bool(np.allclose(m, dagger(m), rtol=0, atol=atol))


def allclose(a: np.ndarray, b: np.ndarray, atol: float | None = None) -> bool:
    atol = tolerances.get().matrix_atol if atol is None else atol
    return bool(np.allclose(a, b, rtol=0, atol=atol))


def hermitian_eigh(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of the Hermitian part of ``m`` (ascending eigenvalues)."""
    m = np.asarray(m, dtype=complex)
    return np.linalg.eigh((m + dagger(m)) / 2)


def _check_psd_input(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    if np.max(np.abs(m - dagger(m)), initial=0.0) > tolerances.get().hermitian_atol:
        raise NotHermitian("matrix is not Hermitian")
    return m


def psd_sqrt(m: np.ndarray) -> np.ndarray:
    """Hermitian PSD square root.

    Eigenvalues slightly below zero (down to ``psd_reject``) are clamped to 0
    before rooting; anything more negative raises :class:`NotPsd`.
    """
    m = _check_psd_input(m)
    w, v = hermitian_eigh(m)
    if w.size and w[0] < tolerances.get().psd_reject:
        raise NotPsd(f"smallest eigenvalue {w[0]:.3e} is negative")
    w = np.sqrt(np.clip(w, 0.0, None))
    return (v * w) @ dagger(v)


def _rounded_root(m: np.ndarray) -> np.ndarray:
    # eigenvalues at round-off level are set to zero so rank-deficient
    # inputs keep their exact rank; their square roots would be O(1e-8)
    m = _check_psd_input(m)
    w, v = hermitian_eigh(m)
    if w.size and w[0] < tolerances.get().psd_reject:
        raise NotPsd(f"smallest eigenvalue {w[0]:.3e} is negative")
    w = np.where(w > 64 * np.finfo(float).eps * max(w[-1], 1.0), w, 0.0)
    return (v * np.sqrt(w)) @ dagger(v)


def state_fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Uhlmann fidelity ``(tr |sqrt(rho) sqrt(sigma)|)**2``.

    Kets are accepted for either argument.
    """
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.shape[0] != sigma.shape[0]:
        raise DimensionMismatch(
            f"dimensions differ: {rho.shape[0]} vs {sigma.shape[0]}")
    if rho.ndim == 1 and sigma.ndim == 1:
        f = abs(np.vdot(rho, sigma)) ** 2
    elif rho.ndim == 1:
        f = np.real(np.vdot(rho, sigma @ rho))
    elif sigma.ndim == 1:
        f = np.real(np.vdot(sigma, rho @ sigma))
    else:
        s = np.linalg.svd(_rounded_root(rho) @ _rounded_root(sigma), compute_uv=False)
        f = np.sum(s) ** 2
    return float(np.clip(f, 0.0, 1.0))


def infidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    return 1.0 - state_fidelity(rho, sigma)


def validate_density(rho: np.ndarray, dim: int | None = None) -> np.ndarray:
    """Return ``rho`` as a complex array, raising if it is not a valid state."""
    rho = np.asarray(rho, dtype=complex)
    tol = tolerances.get()
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {rho.shape}")
    if dim is not None and rho.shape[0] != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {rho.shape[0]}")
    if not is_hermitian(rho, tol.matrix_atol):
        raise NotHermitian("density operator is not Hermitian")
    if abs(np.trace(rho) - 1) > tol.trace_atol:
        raise NotNormalized(f"trace is {np.trace(rho).real:.15g}")
    if np.linalg.eigvalsh(rho)[0] < tol.psd_floor:
        raise NotPsd("density operator has a negative eigenvalue")
    return rho


def bloch_to_density(bloch) -> np.ndarray:
    """Qubit state ``(I + s.sigma) / 2`` for a Bloch vector inside the ball."""
    s = np.asarray(bloch, dtype=float)
    if s.shape != (3,):
        raise DimensionMismatch("a Bloch vector has three components")
    if np.linalg.norm(s) > 1 + tolerances.get().bloch_atol:
        raise BlochOutOfBall(f"|s| = {np.linalg.norm(s):.15g} > 1")
    return (I2 + np.einsum("a,aij->ij", s, PAULIS)) / 2


def density_to_bloch(rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise DimensionMismatch("Bloch vectors exist only for qubits")
    return np.real(np.einsum("aij,ji->a", PAULIS, rho))


def ket_to_bloch(ket: np.ndarray) -> np.ndarray:
    return density_to_bloch(projector(ket))


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.trace(rho @ rho)))


def hs_distance_sq(a: np.ndarray, b: np.ndarray) -> float:
    """Squared Hilbert-Schmidt distance ``tr[(a - b)^2]`` for Hermitian a, b."""
    d = np.asarray(a) - np.asarray(b)
    return float(np.real(np.vdot(d, d)))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_pure(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return z / np.linalg.norm(z)


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density matrix from the induced (Ginibre) measure."""
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ dagger(g)
    return rho / np.trace(rho).real


def random_bloch(rng: np.random.Generator, radius: float | None = None) -> np.ndarray:
    """Bloch vector uniform in the ball, or uniform on the sphere of ``radius``."""
    v = rng.standard_normal(3)
    v /= np.linalg.norm(v)
    if radius is None:
        radius = rng.random() ** (1 / 3)
    return radius * v


def check_normalized_ket(ket: np.ndarray) -> np.ndarray:
    ket = np.asarray(ket, dtype=complex)
    if abs(np.linalg.norm(ket) - 1) > tolerances.get().matrix_atol:
        raise NotNormalized(f"|psi| = {np.linalg.norm(ket):.15g}")
    return ket
