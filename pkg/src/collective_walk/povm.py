"""Qubit SIC states, the five-outcome collective SIC-POVM and POVM utilities."""

from __future__ import annotations

import dataclasses
import json

import numpy as np

from . import tolerances
from .core import (SINGLET, dagger, hermitian_eigh, projector, state_fidelity,
                   tensor)
from .errors import (DimensionMismatch, InvalidPovm, NotNormalized,
                     ShapeMismatch, ZeroTraceEffect)


@dataclasses.dataclass(frozen=True, eq=False)
class Povm:
    """Ordered list of effects acting on a ``dim``-dimensional space.

    ``effects`` has shape ``(k, dim, dim)``. Construction validates that every
    effect is Hermitian PSD and that they sum to the identity, both within
    the ``povm_atol`` tolerance; pass ``validate=False`` to skip this (used
    for intermediate, possibly perturbed operator sets).
    """

    effects: np.ndarray
    labels: tuple[str, ...] = ()
    validate: dataclasses.InitVar[bool] = True

    def __post_init__(self, validate):
        effects = np.array(self.effects, dtype=complex)
        if effects.ndim != 3 or effects.shape[1] != effects.shape[2]:
            raise ShapeMismatch(f"effects must have shape (k, d, d), got {effects.shape}")
        effects.setflags(write=False)
        object.__setattr__(self, "effects", effects)
        labels = tuple(self.labels) or tuple(f"E{j + 1}" for j in range(len(effects)))
        if len(labels) != len(effects):
            raise ShapeMismatch("one label per effect is required")
        object.__setattr__(self, "labels", labels)
        if validate:
            check_povm(effects)

    @property
    def dim(self) -> int:
        return self.effects.shape[1]

    def __len__(self) -> int:
        return self.effects.shape[0]

    def __getitem__(self, j: int) -> np.ndarray:
        return self.effects[j]

    def completeness_residual(self) -> float:
        return float(np.max(np.abs(self.effects.sum(axis=0) - np.eye(self.dim))))

    def to_dict(self) -> dict:
        d = self.dim
        return {
            "dim": d,
            "effects": [[[float(z.real), float(z.imag)] for z in e.reshape(-1)]
                        for e in self.effects],
            "labels": list(self.labels),
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict, validate: bool = True) -> "Povm":
        d = int(data["dim"])
        effects = np.array([[complex(re, im) for re, im in e] for e in data["effects"]])
        return cls(effects.reshape(-1, d, d), tuple(data.get("labels", ())), validate)

    @classmethod
    def from_json(cls, text: str, validate: bool = True) -> "Povm":
        return cls.from_dict(json.loads(text), validate)


def check_povm(effects: np.ndarray, atol: float | None = None) -> None:
    atol = tolerances.get().povm_atol if atol is None else atol
    for j, e in enumerate(effects):
        if np.max(np.abs(e - dagger(e))) > atol:
            raise InvalidPovm(f"effect {j} is not Hermitian")
        if hermitian_eigh(e)[0][0] < -atol:
            raise InvalidPovm(f"effect {j} is not positive semidefinite")
    residual = np.max(np.abs(effects.sum(axis=0) - np.eye(effects.shape[1])))
    if residual > atol:
        raise InvalidPovm(f"effects sum to identity only within {residual:.3e}")


def qubit_sic_states() -> list[np.ndarray]:
    """The four tetrahedral qubit states, psi_1 = |0> and the rest in the xz-ring."""
    w = np.exp(2j * np.pi / 3)
    r2 = np.sqrt(2)
    return [
        np.array([1, 0], dtype=complex),
        np.array([1, r2], dtype=complex) / np.sqrt(3),
        np.array([1, w * r2], dtype=complex) / np.sqrt(3),
        np.array([1, np.conj(w) * r2], dtype=complex) / np.sqrt(3),
    ]


def collective_sic_povm() -> Povm:
    """Two-copy POVM: ``3/4 (|psi_j><psi_j|)^{(x)2}`` for j=1..4 plus the singlet."""
    effects = [0.75 * tensor(projector(k), projector(k)) for k in qubit_sic_states()]
    effects.append(projector(SINGLET))
    return Povm(np.array(effects), ("E1", "E2", "E3", "E4", "E5"))


def outcome_probabilities(state: np.ndarray, povm: Povm) -> np.ndarray:
    """Born-rule probabilities ``tr(state E_j)``.

    Tiny negative values and normalisation errors up to ``prob_slack`` are
    repaired silently; larger normalisation errors raise :class:`NotNormalized`.
    """
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        state = projector(state)
    if state.shape != (povm.dim, povm.dim):
        raise DimensionMismatch(
            f"state of shape {state.shape} does not match POVM dimension {povm.dim}")
    p = np.real(np.einsum("kij,ji->k", povm.effects, state))
    tol = tolerances.get()
    total = p.sum()
    if abs(total - 1) > tol.prob_reject:
        raise NotNormalized(f"probabilities sum to {total:.15g}")
    p = np.clip(p, 0.0, 1.0)
    if abs(p.sum() - 1) <= tol.prob_slack:
        p = p / p.sum()
    return p


def normalized_element(povm: Povm, j: int) -> np.ndarray:
    """``E_j / tr(E_j)`` as a density operator."""
    e = povm.effects[j]
    tr = np.trace(e).real
    if tr < tolerances.get().zero_trace:
        raise ZeroTraceEffect(f"effect {j} has trace {tr:.3e}")
    return e / tr


def povm_fidelity(p: Povm, q: Povm) -> float:
    """Fidelity between two POVMs with aligned outcomes.

    Equal to the fidelity of the block-diagonal states ``sum_j E_j (x) |j><j| / d``,
    evaluated blockwise as ``(sum_j w_j sqrt(F_j))**2`` with
    ``w_j = sqrt(tr E_j tr E'_j) / d`` and ``F_j`` the fidelity between the
    trace-normalised effects.
    """
    if p.dim != q.dim or len(p) != len(q):
        raise ShapeMismatch(
            f"cannot compare POVMs of shapes {p.effects.shape} and {q.effects.shape}")
    if p is q:
        return 1.0
    total = 0.0
    for j in range(len(p)):
        a, b = normalized_element(p, j), normalized_element(q, j)
        w = np.sqrt(np.trace(p.effects[j]).real * np.trace(q.effects[j]).real) / p.dim
        total += w * np.sqrt(state_fidelity(a, b))
    return float(min(total ** 2, 1.0))


def element_fidelities(p: Povm, q: Povm) -> np.ndarray:
    """Per-outcome fidelities between trace-normalised effects."""
    if p.dim != q.dim or len(p) != len(q):
        raise ShapeMismatch("POVMs have different shapes")
    return np.array([state_fidelity(normalized_element(p, j), normalized_element(q, j))
                     for j in range(len(p))])


def conjugate(povm: Povm, u: np.ndarray) -> Povm:
    """``U E_j U^dagger`` for every effect."""
    return Povm(u @ povm.effects @ dagger(u), povm.labels)
