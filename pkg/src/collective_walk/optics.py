"""Jones-calculus wave plates, coin decomposition and two-copy state preparation.

Polarisation basis: |H> = logical 0, |V> = logical 1. Angles are in degrees.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import itertools
import json
import math
from typing import Iterable, Sequence

import numpy as np
from scipy import optimize

from .core import I2, dagger, projector, tensor
from .errors import InvalidAngleSet, NoConvergence

H_POL = np.array([1, 0], dtype=complex)
V_POL = np.array([0, 1], dtype=complex)


def hwp_unitary(h: float) -> np.ndarray:
    """Half-wave plate at angle ``h``: [[cos2h, sin2h], [sin2h, -cos2h]]."""
    c, s = math.cos(math.radians(2 * h)), math.sin(math.radians(2 * h))
    return np.array([[c, s], [s, -c]], dtype=complex)


def qwp_unitary(q: float) -> np.ndarray:
    """Quarter-wave plate at angle ``q``."""
    c, s = math.cos(math.radians(2 * q)), math.sin(math.radians(2 * q))
    phase = np.exp(1j * np.pi / 4) / np.sqrt(2)
    return phase * np.array([[1 - 1j * c, -1j * s], [-1j * s, 1 + 1j * c]])


_PLATES = {"HWP": hwp_unitary, "QWP": qwp_unitary}


def wrap_angle(a: float, period: float = 180.0) -> float:
    """Map an angle to (-period/2, period/2]."""
    a = math.fmod(a, period)
    if a <= -period / 2:
        a += period
    elif a > period / 2:
        a -= period
    return a


@dataclasses.dataclass(frozen=True)
class PlateStack:
    """Wave plates in the order light passes through them."""

    plates: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        # U_H(h + 90) = -U_H(h): HWP angles are only meaningful modulo 90
        # as far as the stack's action up to global phase is concerned.
        plates = tuple((kind, wrap_angle(float(angle), 90.0 if kind == "HWP" else 180.0))
                       for kind, angle in self.plates)
        for kind, _ in plates:
            if kind not in _PLATES:
                raise ValueError(f"unknown plate kind {kind!r}")
        object.__setattr__(self, "plates", plates)

    def unitary(self) -> np.ndarray:
        u = I2.copy()
        for kind, angle in self.plates:
            u = _PLATES[kind](angle) @ u
        return u

    def to_json(self) -> str:
        return json.dumps([{"kind": k, "angle": a} for k, a in self.plates])


def phase_residual(u: np.ndarray, target: np.ndarray) -> tuple[float, complex]:
    """Max-entry deviation of ``u`` from ``target`` after removing a global phase."""
    overlap = np.trace(dagger(u) @ target)
    phase = overlap / abs(overlap) if abs(overlap) > 1e-15 else 1.0
    return float(np.max(np.abs(phase * u - target))), complex(phase)


# Plate layouts tried in order of increasing length.
_LAYOUTS = (
    (),
    ("HWP",), ("QWP",),
    ("HWP", "QWP"), ("QWP", "HWP"), ("QWP", "QWP"),
    ("QWP", "HWP", "QWP"),
)


def _fit_layout(layout, target, starts):
    def residuals(angles):
        u = PlateStack(tuple(zip(layout, angles))).unitary()
        overlap = np.trace(dagger(u) @ target)
        phase = overlap / abs(overlap) if abs(overlap) > 1e-15 else 1.0
        d = (phase * u - target).ravel()
        return np.concatenate([d.real, d.imag])

    best = None
    for x0 in starts:
        sol = optimize.least_squares(residuals, x0, xtol=1e-15, ftol=1e-15, gtol=1e-15)
        stack = PlateStack(tuple(zip(layout, sol.x)))
        res, phase = phase_residual(stack.unitary(), target)
        if best is None or res < best[0]:
            best = (res, stack, phase)
        if res <= 1e-12:
            break
    return best


def decompose_coin(target: np.ndarray, tol: float = 1e-8,
                   n_starts: int = 6) -> tuple[PlateStack, complex]:
    """Find a short wave-plate stack equal to ``target`` up to a global phase.

    Tries the empty stack, single plates, pairs and finally the universal
    QWP-HWP-QWP layout, each from a grid of starting angles. Returns the
    stack and the phase ``g`` with ``g * stack.unitary() ~= target``.
    """
    target = np.asarray(target, dtype=complex)
    if not np.allclose(target @ dagger(target), I2, rtol=0, atol=1e-10):
        raise ValueError("target is not unitary")
    grid = np.linspace(-90, 90, n_starts, endpoint=False) + 7.5
    best = None
    for layout in _LAYOUTS:
        if not layout:
            res, phase = phase_residual(I2, target)
            cand = (res, PlateStack(), phase)
        else:
            starts = [np.array(s) for s in itertools.product(grid, repeat=len(layout))]
            cand = _fit_layout(layout, target, starts)
        if best is None or cand[0] < best[0]:
            best = cand
        if cand[0] <= tol:
            return cand[1], cand[2]
    if best[0] > 1e-6:
        raise NoConvergence(f"plate decomposition residual {best[0]:.3e}")
    return best[1], best[2]


def prepare_qubit(alpha: float, h: float, q: float | None) -> np.ndarray:
    """``U_Q(q) U_H(h) (sin^2 2a |H><H| + cos^2 2a |V><V|) U_H(h)^+ U_Q(q)^+``.

    ``q=None`` omits the quarter-wave plate.
    """
    s2 = math.sin(math.radians(2 * alpha)) ** 2
    rho = np.diag([s2, 1 - s2]).astype(complex)
    u = hwp_unitary(h)
    if q is not None:
        u = qwp_unitary(q) @ u
    return u @ rho @ dagger(u)


def alpha_for_length(s: float) -> float:
    """Pump angle giving Bloch length ``s``: arccos(s) / 4, in degrees."""
    return math.degrees(math.acos(s)) / 4


@dataclasses.dataclass(frozen=True)
class PrepAngles:
    """One column of the walker-coin preparation table (degrees).

    ``alpha2=None`` means the alpha2 plate and the quartz dephaser are absent;
    ``q2=None`` means the q2 quarter-wave plate is removed.
    """

    alpha1: float
    h1: float
    q1: float
    h3: float
    h2: float
    q2: float | None
    alpha2: float | None = None
    name: str = ""

    @property
    def quartz_present(self) -> bool:
        return self.alpha2 is not None

    @property
    def q2_present(self) -> bool:
        return self.q2 is not None

    def validate(self) -> None:
        if self.h3 not in (0, 45):
            raise InvalidAngleSet(f"h3 must be 0 or 45 degrees, got {self.h3}")
        if self.h3 == 0 and (self.q2_present or self.quartz_present):
            raise InvalidAngleSet("the entangled (h3 = 0) setting needs q2 removed and no quartz")
        if self.h3 == 45 and not self.q2_present:
            raise InvalidAngleSet("product settings (h3 = 45) need the q2 plate")


def _on_polarization(u: np.ndarray) -> np.ndarray:
    return tensor(I2, u)


def prepare_two_copy(p: PrepAngles) -> np.ndarray:
    """Walker (path) x coin (polarisation) state produced by the preparation module.

    Path qubit: the polarisation state from (alpha1, h1, q1) is split by a beam
    displacer, H into path 1 (logical 0) and V into path -1 (logical 1); a
    half-wave plate at h3 sits in path 1. Coin: optional alpha2 plate followed
    by full dephasing (quartz), then h2 and q2 act on the polarisation in both
    paths.
    """
    p.validate()
    first = prepare_qubit(p.alpha1, p.h1, p.q1)
    # after the beam displacer: path = former polarisation, polarisation = H in
    # path 1 and V in path -1
    amp = np.zeros((4, 2), dtype=complex)      # rows: |path, pol>, cols: |H>, |V>
    amp[0b00, 0] = 1                           # |H> -> |path 1, H>
    amp[0b11, 1] = 1                           # |V> -> |path -1, V>
    rho = amp @ first @ dagger(amp)
    h3 = np.zeros((4, 4), dtype=complex)
    h3[:2, :2] = hwp_unitary(p.h3)
    h3[2:, 2:] = I2
    rho = h3 @ rho @ dagger(h3)
    if p.quartz_present:
        u = _on_polarization(hwp_unitary(p.alpha2))
        rho = u @ rho @ dagger(u)
        keep = [_on_polarization(projector(H_POL)), _on_polarization(projector(V_POL))]
        rho = sum(k @ rho @ k for k in keep)
    u = hwp_unitary(p.h2)
    if p.q2_present:
        u = qwp_unitary(p.q2) @ u
    u = _on_polarization(u)
    return u @ rho @ dagger(u)


def preparation_table(s1: float = 0.5, s2: float = 0.469,
                      theta: float = 30.0) -> dict[str, PrepAngles]:
    """Parameter columns for every state used in the experiments.

    ``s1``/``s2`` are the Bloch lengths of the mixed families and ``theta``
    (degrees) selects the member of the psi(theta) family.
    """
    def product(name, h, q, alpha=0.0, alpha2=None):
        return PrepAngles(alpha, h, q, 45, h, q, alpha2, name)

    cols = [
        product("+z", 45, 0), product("-z", 0, 0),
        product("+x", -22.5, 45), product("-x", 22.5, 45),
        product("+y", -22.5, 0), product("-y", 22.5, 0),
        product("E1hat", 45, 0),
        product("E2hat", -17.63, -35.26),
        product("E3hat", 0, 27.37),
        product("E4hat", 27.37, 27.37),
        PrepAngles(0, 22.5, 45, 0, 45, None, None, "E5hat"),
        product("bloch101", 56.25, 22.5),
        product("bloch111", -24.95, 22.5),
        product("psi_theta", 90 - theta / 2, -theta),
        product("s1", 0, 0, alpha_for_length(s1), alpha_for_length(s1)),
        product("s2", 45, 19.57, alpha_for_length(s2), alpha_for_length(s2)),
    ]
    return {c.name: c for c in cols}


_CSV_FIELDS = ("name", "alpha1", "h1", "q1", "h3", "alpha2", "h2", "q2")


def _opt(x):
    return None if x in ("", "-", None) else float(x)


def read_preparation_csv(text: str) -> dict[str, PrepAngles]:
    """Parse a preparation table; empty or ``-`` cells mean the element is absent."""
    out = {}
    for row in csv.DictReader(io.StringIO(text)):
        p = PrepAngles(float(row["alpha1"]), float(row["h1"]), float(row["q1"]),
                       float(row["h3"]), float(row["h2"]), _opt(row["q2"]),
                       _opt(row["alpha2"]), row["name"])
        out[p.name] = p
    return out


def write_preparation_csv(table: Iterable[PrepAngles]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_CSV_FIELDS)
    for p in table:
        w.writerow([p.name, p.alpha1, p.h1, p.q1, p.h3,
                    "-" if p.alpha2 is None else p.alpha2, p.h2,
                    "-" if p.q2 is None else p.q2])
    return buf.getvalue()


def read_preparation_json(text: str) -> dict[str, PrepAngles]:
    data = json.loads(text)
    return {name: PrepAngles(name=name, **{k: v for k, v in cols.items() if k != "name"})
            for name, cols in data.items()}


def prep_table_to_json(table: Sequence[PrepAngles]) -> str:
    return json.dumps({p.name: {k: v for k, v in dataclasses.asdict(p).items() if k != "name"}
                       for p in table}, indent=2)
