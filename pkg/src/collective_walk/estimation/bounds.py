"""Asymptotic precision bounds for qubit tomography with ``n`` copies.

``gm_bounds`` holds for any measurement on single copies; ``collective_bounds``
for the two-copy collective measurement scheme.
"""

from __future__ import annotations

import dataclasses
import math

from ..errors import DomainError

#: Bloch length where the two branches of the collective MSE bound meet.
S_STAR = (3 + 4 * math.sqrt(3)) / 13


@dataclasses.dataclass(frozen=True)
class BoundsReport:
    s: float
    n: int
    gm_infidelity: float
    gm_mse: float
    coll_infidelity: float
    coll_mse: float

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _check(s: float, n: float) -> None:
    if not 0 <= s <= 1:
        raise DomainError(f"Bloch length must lie in [0, 1], got {s}")
    if n < 1:
        raise DomainError(f"number of copies must be at least 1, got {n}")


def gm_bounds(s: float, n: float) -> tuple[float, float]:
    """Single-copy (infidelity, MSE) bounds: ``9/(4n)`` and ``(2+sqrt(1-s^2))^2/(2n)``."""
    _check(s, n)
    return 9 / (4 * n), (2 + math.sqrt(1 - s * s)) ** 2 / (2 * n)


def collective_mse_branches(s: float, n: float) -> tuple[float, float]:
    """Both branches of the collective MSE bound (low-purity, high-purity)."""
    low = (2 + math.sqrt(1 - s * s)) ** 2 / (3 * n)
    high = s * (1 + s) * (3 - s) / ((3 * s - 1) * n) if s > 1 / 3 else math.inf
    return low, high


def collective_bounds(s: float, n: float) -> tuple[float, float]:
    """Collective (infidelity, MSE) bounds; the MSE switches branch at ``S_STAR``."""
    _check(s, n)
    low, high = collective_mse_branches(s, n)
    return 3 / (2 * n), (low if s <= S_STAR else high)


def bounds_report(s: float, n: int) -> BoundsReport:
    gi, gm = gm_bounds(s, n)
    ci, cm = collective_bounds(s, n)
    return BoundsReport(s, n, gi, gm, ci, cm)
