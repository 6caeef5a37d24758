"""One-dimensional discrete quantum walk with site- and step-dependent coins.

The walker lives on positions -6..6 with a two-level coin. One step applies
the coin at every site (identity where the schedule is silent) and then the
conditional shift ``|x,0> -> |x+1,0>``, ``|x,1> -> |x-1,1>``. A two-qubit
input ``a|00> + b|01> + c|10> + d|11>`` is encoded as
``a|1,0> + b|1,1> + c|-1,0> + d|-1,1>``, i.e. the first logical qubit is the
walker (position 1 for 0, -1 for 1) and the second is the coin.
"""

from __future__ import annotations

import dataclasses
import json
from typing import Mapping, Sequence

import numpy as np

from . import tolerances
from .core import I2, check_normalized_ket, dagger, hermitian_eigh
from .errors import (DimensionMismatch, IncompleteDetectorCover,
                     LatticeOverflow, NotNormalized, ShapeMismatch)
from .povm import Povm

X_MIN, X_MAX = -6, 6
N_SITES = X_MAX - X_MIN + 1

# logical basis |00>,|01>,|10>,|11> -> (position, coin)
ENCODING = ((1, 0), (1, 1), (-1, 0), (-1, 1))


@dataclasses.dataclass(frozen=True, eq=False)
class WalkerCoinState:
    """Amplitudes over (position, coin), stored densely as a (13, 2) array."""

    amplitudes: np.ndarray
    step: int = 0

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (N_SITES, 2):
            raise ShapeMismatch(f"expected amplitudes of shape {(N_SITES, 2)}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def basis(cls, position: int, coin: int) -> "WalkerCoinState":
        amps = np.zeros((N_SITES, 2), dtype=complex)
        amps[position - X_MIN, coin] = 1
        return cls(amps)

    def amplitude(self, position: int, coin: int) -> complex:
        return complex(self.amplitudes[position - X_MIN, coin])

    def probability_at(self, position: int) -> float:
        return float(np.sum(np.abs(self.amplitudes[position - X_MIN]) ** 2))

    def position_probabilities(self) -> dict[int, float]:
        p = np.sum(np.abs(self.amplitudes) ** 2, axis=1)
        return {x: float(p[x - X_MIN]) for x in range(X_MIN, X_MAX + 1)}

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def support(self, atol: float = 1e-14) -> list[tuple[int, int]]:
        xs, cs = np.nonzero(np.abs(self.amplitudes) > atol)
        return [(int(x) + X_MIN, int(c)) for x, c in zip(xs, cs)]

    def to_dict(self, atol: float = 1e-15) -> dict:
        entries = [
            {"position": x, "coin": c,
             "re": float(self.amplitudes[x - X_MIN, c].real),
             "im": float(self.amplitudes[x - X_MIN, c].imag)}
            for x, c in self.support(atol)
        ]
        return {"step": self.step, "entries": entries}


class CoinSchedule:
    """Lookup ``(position, step) -> 2x2 unitary``, identity where unspecified."""

    def __init__(self, steps: int, table: Mapping[tuple[int, int], np.ndarray]):
        if steps < 1:
            raise ValueError("a schedule needs at least one step")
        self.steps = steps
        self._table: dict[tuple[int, int], np.ndarray] = {}
        for (x, t), c in table.items():
            c = np.array(c, dtype=complex)
            if c.shape != (2, 2):
                raise ShapeMismatch(f"coin at {(x, t)} is not 2x2")
            if not np.allclose(c @ dagger(c), I2, rtol=0, atol=tolerances.get().matrix_atol):
                raise ValueError(f"coin at {(x, t)} is not unitary")
            if not 1 <= t <= steps:
                raise ValueError(f"coin at {(x, t)} lies outside steps 1..{steps}")
            c.setflags(write=False)
            self._table[(int(x), int(t))] = c

    @property
    def table(self) -> dict[tuple[int, int], np.ndarray]:
        return dict(self._table)

    def coin(self, position: int, step: int) -> np.ndarray:
        return self._table.get((position, step), I2)

    def coins_at_step(self, step: int) -> np.ndarray:
        """All site coins for one step as a (13, 2, 2) array."""
        out = np.broadcast_to(I2, (N_SITES, 2, 2)).copy()
        for (x, t), c in self._table.items():
            if t == step:
                out[x - X_MIN] = c
        return out


@dataclasses.dataclass(frozen=True)
class DetectorMap:
    """Association detector position -> outcome index (0-based)."""

    positions: Mapping[int, int]
    n_outcomes: int

    def __post_init__(self):
        outcomes = sorted(self.positions.values())
        if outcomes != list(range(self.n_outcomes)):
            raise ValueError("every outcome must be assigned to exactly one position")

    def __call__(self, position: int) -> int:
        return self.positions[position]

    def position_of(self, outcome: int) -> int:
        for x, j in self.positions.items():
            if j == outcome:
                return x
        raise KeyError(outcome)


def collective_sic_schedule() -> tuple[CoinSchedule, DetectorMap]:
    """Five-step coin schedule whose position readout is the collective SIC-POVM.

    Detectors: position 6 -> E1, 4 -> E2, 2 -> E5, 0 -> E3, -2 -> E4.
    """
    r2, r3 = np.sqrt(2), np.sqrt(3)
    c_m1_1 = np.array([[1, r2], [r2, -1]]) / r3
    c_m2_2 = np.array([[0, 1], [1, 0]])
    c_0_2 = np.array([[r3, 1], [1, -r3]]) / 2
    c_1_3 = np.array([[r2, 1], [1, -r2]]) / r3
    c_0_4 = np.array([[1, 0], [0, -1]])
    c_m1_5 = np.array([[1 - 1j, 1 + 1j], [-1 + 1j, 1 + 1j]]) / 2
    table = {
        (-1, 1): c_m1_1,
        (-2, 2): c_m2_2,
        (0, 2): c_0_2,
        (2, 2): c_0_2,
        (1, 3): c_1_3,
        (-1, 3): c_m1_1,
        (0, 4): c_0_4,
        (-2, 4): c_m2_2,
        (-1, 5): c_m1_5,
    }
    detectors = DetectorMap({6: 0, 4: 1, 2: 4, 0: 2, -2: 3}, n_outcomes=5)
    return CoinSchedule(5, table), detectors


def encode_ket(ket: np.ndarray) -> WalkerCoinState:
    ket = np.asarray(ket, dtype=complex)
    if ket.shape != (4,):
        raise DimensionMismatch("expected a two-qubit ket")
    check_normalized_ket(ket)
    amps = np.zeros((N_SITES, 2), dtype=complex)
    for coeff, (x, c) in zip(ket, ENCODING):
        amps[x - X_MIN, c] = coeff
    return WalkerCoinState(amps)


def encode_two_qubit(state: np.ndarray):
    """Encode a two-qubit ket, or a density matrix as weighted pure branches.

    A ket gives a single :class:`WalkerCoinState`; a 4x4 density matrix gives a
    list of ``(weight, WalkerCoinState)`` from its eigendecomposition, dropping
    zero-weight eigenvectors.
    """
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        return encode_ket(state)
    if state.shape != (4, 4):
        raise DimensionMismatch("expected a 4x4 density matrix")
    if abs(np.trace(state) - 1) > tolerances.get().trace_atol * 100:
        raise NotNormalized(f"trace is {np.trace(state).real:.15g}")
    w, v = hermitian_eigh(state)
    branches = []
    for weight, vec in zip(w[::-1], v.T[::-1]):
        if weight > 1e-15:
            branches.append((float(weight), encode_ket(vec / np.linalg.norm(vec))))
    return branches


def evolve_step(state: WalkerCoinState, schedule: CoinSchedule, t: int) -> WalkerCoinState:
    """Apply coin(t) site by site, then the conditional shift."""
    if not 1 <= t <= schedule.steps:
        raise ValueError(f"step {t} outside 1..{schedule.steps}")
    coined = np.einsum("xij,xj->xi", schedule.coins_at_step(t), state.amplitudes)
    atol = tolerances.get().matrix_atol
    if abs(coined[-1, 0]) > atol or abs(coined[0, 1]) > atol:
        raise LatticeOverflow(f"amplitude leaves [{X_MIN}, {X_MAX}] at step {t}")
    out = np.zeros_like(coined)
    out[1:, 0] = coined[:-1, 0]
    out[:-1, 1] = coined[1:, 1]
    return WalkerCoinState(out, step=t)


def walk_trace(ket: np.ndarray, schedule: CoinSchedule | None = None) -> list[WalkerCoinState]:
    """States at steps 0..steps for a pure two-qubit input."""
    if schedule is None:
        schedule, _ = collective_sic_schedule()
    states = [encode_ket(ket)]
    for t in range(1, schedule.steps + 1):
        states.append(evolve_step(states[-1], schedule, t))
    return states


def trace_to_json(states: Sequence[WalkerCoinState], **kwargs) -> str:
    return json.dumps([s.to_dict() for s in states], **kwargs)


def detector_probabilities(final, detectors: DetectorMap) -> np.ndarray:
    """Outcome probabilities (ordered by outcome index) read from final state(s)."""
    branches = [(1.0, final)] if isinstance(final, WalkerCoinState) else final
    p = np.zeros(detectors.n_outcomes)
    for weight, st in branches:
        for x, j in detectors.positions.items():
            p[j] += weight * st.probability_at(x)
    return p


def run_walk(state: np.ndarray, schedule: CoinSchedule | None = None,
             detectors: DetectorMap | None = None):
    """Run the full walk and read out the detectors.

    Returns ``(final, probabilities)`` where ``final`` mirrors the output of
    :func:`encode_two_qubit` (one state, or a list of weighted branches) and
    ``probabilities`` is ordered by outcome index (E1..E5 for the default
    schedule).
    """
    if schedule is None:
        schedule, default_map = collective_sic_schedule()
        detectors = default_map if detectors is None else detectors
    if detectors is None:
        raise ValueError("a detector map is required for a custom schedule")

    def evolve(st):
        for t in range(1, schedule.steps + 1):
            st = evolve_step(st, schedule, t)
        return st

    encoded = encode_two_qubit(state)
    if isinstance(encoded, WalkerCoinState):
        final = evolve(encoded)
    else:
        final = [(w, evolve(st)) for w, st in encoded]
    return final, detector_probabilities(final, detectors)


def extract_induced_povm(schedule: CoinSchedule, detectors: DetectorMap) -> Povm:
    """POVM realised by the walk: ``E_d = M_d^dagger M_d`` per detector position.

    ``M_d`` collects the final amplitudes at position ``d`` (rows: coin) for
    each of the four encoded logical basis inputs (columns).
    """
    finals = []
    for k in range(4):
        st = encode_ket(np.eye(4)[k])
        for t in range(1, schedule.steps + 1):
            st = evolve_step(st, schedule, t)
        finals.append(st.amplitudes)
    finals = np.stack(finals, axis=-1)              # (site, coin, input)
    effects = np.zeros((detectors.n_outcomes, 4, 4), dtype=complex)
    for x, j in detectors.positions.items():
        m = finals[x - X_MIN]
        effects[j] = dagger(m) @ m
    residual = np.max(np.abs(effects.sum(axis=0) - np.eye(4)))
    if residual > tolerances.get().leak_atol:
        raise IncompleteDetectorCover(
            f"detected effects sum to identity only within {residual:.3e}")
    labels = tuple(f"E{j + 1}" for j in range(detectors.n_outcomes))
    return Povm(effects, labels)


EARLY_DETECTORS = (((3, 2), (6, 5)), ((2, 3), (4, 5)), ((1, 4), (2, 5)))


def early_detection_equivalence(n_random: int = 50, seed: int = 0,
                                atol: float = 1e-12) -> dict:
    """Check that early detectors see the same probabilities as the final ones.

    Pairs (position, step): (3, 2) ~ (6, 5), (2, 3) ~ (4, 5), (1, 4) ~ (2, 5).
    Random pure two-qubit inputs are drawn from ``seed``.
    """
    from .core import random_pure

    schedule, _ = collective_sic_schedule()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_random):
        states = walk_trace(random_pure(4, rng), schedule)
        for (x_early, t_early), (x_final, t_final) in EARLY_DETECTORS:
            diff = abs(states[t_early].probability_at(x_early)
                       - states[t_final].probability_at(x_final))
            worst = max(worst, diff)
    return {"pairs": [list(map(list, p)) for p in EARLY_DETECTORS],
            "n_random": n_random, "max_deviation": worst, "ok": worst <= atol}
