"""Accelerated projected-gradient ML estimation on the two-copy manifold.

The iterate is always of the form ``rho (x) rho``; after every gradient step
the candidate is pulled back with :func:`project_two_copy`. Momentum follows
the usual ``theta`` schedule and is reset, together with a shrinking of the
step size, whenever the log-likelihood would decrease.
"""

from __future__ import annotations

import dataclasses
import json
import math

import numpy as np
from scipy import optimize

from ..core import I2, PAULIS
from ..povm import Povm
from ..sampling import MeasurementRecord
from .projection import PAULI2Q, project_bloch, two_copy_coefficients


@dataclasses.dataclass(frozen=True)
class ApgConfig:
    epsilon0: float = 0.3
    beta: float = 0.5
    max_iters: int = 2000
    tol: float = 1e-10
    p_floor: float = 1e-12

    def __post_init__(self):
        if not 0 < self.beta < 1:
            raise ValueError("beta must lie in (0, 1)")
        if self.tol <= 0 or self.epsilon0 <= 0:
            raise ValueError("tol and epsilon0 must be positive")


@dataclasses.dataclass(frozen=True)
class Estimate:
    qubit: np.ndarray
    iterations: int
    final_loglik: float
    converged: bool
    history: tuple[float, ...] = ()

    @property
    def bloch(self) -> np.ndarray:
        return np.real(np.einsum("aij,ji->a", PAULIS, self.qubit))

    def to_dict(self) -> dict:
        return {"bloch": [float(x) for x in self.bloch], "iters": self.iterations,
                "final_loglik": self.final_loglik, "converged": self.converged}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _bloch_state(r):
    return (I2 + np.einsum("a,aij->ij", r, PAULIS)) / 2


class _CoefficientModel:
    """Probabilities and gradients expressed on Pauli coefficient arrays.

    An operator ``X = 1/4 sum c_mn sigma_m (x) sigma_n`` has
    ``tr(X E_j) = sum_mn c_mn e_j,mn / 4`` with ``e_j,mn = tr(E_j sigma_mn)``.
    """

    def __init__(self, povm: Povm, freqs: np.ndarray, p_floor: float):
        self.e = np.real(np.einsum("kij,mnji->kmn", povm.effects, PAULI2Q))
        self.f = freqs
        self.seen = freqs > 0
        # outcomes whose frequency is above the clamp must keep p > p_floor;
        # smaller frequencies (exact data with p ~ 0) only enter clamped
        self.hard = freqs > p_floor
        self.p_floor = p_floor

    def _raw(self, c):
        return np.einsum("kmn,mn->k", self.e, c) / 4

    def probabilities(self, c):
        return np.maximum(self._raw(c), self.p_floor)

    def feasible(self, c):
        return bool(np.all(self._raw(c)[self.hard] > self.p_floor))

    def value(self, c):
        """F at ``c``; -inf if an observed outcome has (numerically) zero probability.

        The clamped value would let the iteration accept pure states that
        contradict observed counts, after which the clamped gradient explodes.
        """
        p = self._raw(c)
        if np.any(p[self.hard] <= self.p_floor):
            return -math.inf
        return float(self.f[self.seen] @ np.log(np.maximum(p[self.seen], self.p_floor)))

    def gradient(self, c):
        # coefficients of G = sum_j (f_j / p_j) E_j
        return np.einsum("k,kmn->mn", self.f / self.probabilities(c), self.e)

    def bloch_value_and_grad(self, r):
        """F and its gradient with respect to the Bloch vector.

        Returns None when an outcome with non-negligible frequency has
        non-positive probability.
        """
        s = (self.e[self.seen] + self.e[self.seen].transpose(0, 2, 1)) / 2
        a = np.concatenate(([1.0], r))
        sa = s @ a
        p = sa @ a / 4
        hard = self.hard[self.seen]
        if np.any(p[hard] <= 0):
            return None
        f = self.f[self.seen]
        clamped = p <= self.p_floor
        p = np.where(clamped, self.p_floor, p)
        weight = np.where(clamped, 0.0, f / p)
        return float(f @ np.log(p)), weight @ sa[:, 1:] / 2


def _ball_map(z):
    """r = tanh(|z|) z/|z| and its Jacobian; maps R^3 onto the open unit ball."""
    n = np.linalg.norm(z)
    if n < 1e-300:
        return np.zeros(3), np.eye(3)
    t = math.tanh(n)
    u = z / n
    e = math.exp(-2 * n)
    sech2 = 4 * e / (1 + e) ** 2
    jac = (t / n) * np.eye(3) + (sech2 - t / n) * np.outer(u, u)
    return t * u, jac


def _polish_near_sphere(model: _CoefficientModel, r: np.ndarray, f_start: float,
                        max_iters: int = 200) -> tuple[np.ndarray, float, int]:
    """Quasi-Newton refinement in ``z`` coordinates, ``r = tanh(|z|) z/|z|``.

    When the maximiser lies just inside the Bloch sphere the likelihood is
    far stiffer across the sphere than along it and projected-gradient steps
    stall. In ``z`` coordinates the barrier becomes roughly linear. The
    result is kept only if it does not lower the likelihood.
    """
    s = min(float(np.linalg.norm(r)), 1 - 1e-15)
    z0 = math.atanh(s) * r / np.linalg.norm(r) if s > 0 else np.zeros(3)

    def negative(z):
        rr, jac = _ball_map(z)
        d = model.bloch_value_and_grad(rr)
        if d is None:
            return np.inf, np.zeros(3)
        return -d[0], -jac.T @ d[1]

    sol = optimize.minimize(negative, z0, jac=True, method="BFGS",
                            options={"gtol": 1e-12, "maxiter": max_iters})
    r_new = _ball_map(sol.x)[0]
    f_new = model.value(two_copy_coefficients(r_new))
    if f_new >= f_start:
        return r_new, f_new, int(sol.nit)
    return r, f_start, int(sol.nit)


def _frequencies(record) -> np.ndarray:
    if isinstance(record, MeasurementRecord):
        return record.frequencies
    f = np.asarray(record, dtype=float)
    if f.ndim != 1 or np.any(f < 0) or f.sum() <= 0:
        raise ValueError("frequencies must be a non-negative vector with positive sum")
    return f / f.sum()


def apg_estimate(record: MeasurementRecord, povm: Povm, cfg: ApgConfig | None = None,
                 initial_bloch=None, keep_history: bool = False,
                 polish: bool = True, polish_margin: float = 1e-2) -> Estimate:
    """Maximum-likelihood qubit state from two-copy outcome counts.

    ``record`` may also be a plain frequency vector (e.g. exact
    probabilities). Starts from the maximally mixed state unless
    ``initial_bloch`` is given.
    Stops when consecutive log-likelihoods differ by less than ``cfg.tol`` or
    after ``cfg.max_iters`` iterations (then ``converged`` is False). With
    ``polish``, estimates closer than ``polish_margin`` to the Bloch sphere
    are refined by :func:`_polish_near_sphere`; those steps never lower the
    likelihood and are counted in ``iterations``.
    """
    cfg = ApgConfig() if cfg is None else cfg
    if povm.dim != 4:
        raise ValueError("APG estimation expects a two-qubit POVM")
    freqs = _frequencies(record)
    if len(freqs) != len(povm):
        raise ValueError("record and POVM have different numbers of outcomes")
    model = _CoefficientModel(povm, freqs, cfg.p_floor)

    r = np.zeros(3) if initial_bloch is None else np.asarray(initial_bloch, float)
    c = two_copy_coefficients(r)
    f_prev = model.value(c)
    tau = c
    theta = 1.0
    eps = cfg.epsilon0
    history = [f_prev]
    converged = False
    k = 0
    for k in range(1, cfg.max_iters + 1):
        if theta > 1.0 and not model.feasible(tau):
            # momentum overshot out of the state space; restart from the iterate
            tau = c
            theta = 1.0
        r_new = project_bloch(tau + eps * model.gradient(tau))
        c_new = two_copy_coefficients(r_new)
        f_new = model.value(c_new)
        if abs(f_new - f_prev) < cfg.tol:
            if f_new >= f_prev:
                r, c, f_prev = r_new, c_new, f_new
            converged = True
            history.append(f_prev)
            break
        if f_new < f_prev:
            eps *= cfg.beta
            tau = c
            theta = 1.0
        else:
            theta_new = (1 + math.sqrt(1 + 4 * theta * theta)) / 2
            tau = c_new + (theta - 1) / theta_new * (c_new - c)
            theta = theta_new
            r, c, f_prev = r_new, c_new, f_new
        history.append(f_prev)
    if polish and 1 - np.linalg.norm(r) < polish_margin:
        r, f_prev, extra = _polish_near_sphere(model, r, f_prev)
        k += extra
        if extra:
            history.append(f_prev)
    return Estimate(_bloch_state(r), k, f_prev, converged,
                    tuple(history) if keep_history else ())
