"""Monte Carlo experiments comparing tomography schemes, plus power-law fits.

A run repeats "prepare the true state, sample, estimate, score" ``reps``
times for every sample size ``N`` in a grid. Each ``(N, rep)`` pair draws
from its own random stream keyed by the master seed, so results do not
depend on execution order or on the number of worker processes.
"""

from __future__ import annotations

import concurrent.futures
import csv
import dataclasses
import io
import json
import math
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from .core import (KET1, bloch_to_density, density_to_bloch, hs_distance_sq, infidelity,
                   ket_to_bloch, tensor)
from .errors import DomainError, NonPositiveMean
from .estimation.apg import ApgConfig, apg_estimate
from .estimation.bounds import collective_bounds, gm_bounds
from .estimation.qubit_ml import adaptive_two_step_protocol, mub_protocol
from .optics import hwp_unitary, qwp_unitary
from .povm import collective_sic_povm, normalized_element, qubit_sic_states
from .sampling import RngStream, multinomial_sample, simulate_measurement
from .walk import run_walk

SCHEMES = ("collective", "mub", "adaptive")

#: Bloch directions of the two mixed-state families of the optical setup.
S1_DIRECTION = np.array([0.0, 0.0, -1.0])
S2_DIRECTION = ket_to_bloch(qwp_unitary(19.57) @ hwp_unitary(45.0) @ KET1)

TRIAL_FIELDS = ("scheme", "state", "N", "rep", "infidelity", "mse", "converged")
SUMMARY_FIELDS = ("scheme", "state", "N", "mean_infid", "std_infid", "mean_mse", "std_mse",
                  "gm_infid", "coll_infid", "gm_mse", "coll_mse")


# ---------------------------------------------------------------- states

def pure_theta_bloch(theta_deg: float) -> np.ndarray:
    """Bloch vector of ``sin(theta)|0> + cos(theta)|1>``."""
    t = math.radians(theta_deg)
    return np.array([math.sin(2 * t), 0.0, -math.cos(2 * t)])


def parse_state(spec: str) -> np.ndarray:
    """Qubit Bloch vector for a state string.

    Accepted forms: ``bloch:x,y,z``, ``pure:theta_deg``, ``psi1``..``psi4``,
    ``E1hat``..``E4hat`` (the single-copy factor of the product input),
    ``s1:LEN`` and ``s2:LEN``. A bare ``x,y,z`` is read as a Bloch vector.
    ``E5hat`` is entangled and has no single-qubit factor.
    """
    spec = spec.strip()
    head, _, arg = spec.partition(":")
    key = head.lower()
    try:
        if key == "bloch":
            vec = np.array([float(v) for v in arg.split(",")])
        elif key == "pure":
            vec = pure_theta_bloch(float(arg))
        elif key in ("s1", "s2"):
            length = float(arg)
            if not 0 <= length <= 1:
                raise DomainError(f"Bloch length must lie in [0, 1], got {length}")
            vec = length * (S1_DIRECTION if key == "s1" else S2_DIRECTION)
        elif key in ("psi1", "psi2", "psi3", "psi4") and not arg:
            vec = ket_to_bloch(qubit_sic_states()[int(key[3]) - 1])
        elif key in ("e1hat", "e2hat", "e3hat", "e4hat") and not arg:
            vec = ket_to_bloch(qubit_sic_states()[int(key[1]) - 1])
        elif key == "e5hat":
            raise DomainError("E5hat is the singlet and has no single-qubit factor")
        elif "," in spec:
            vec = np.array([float(v) for v in spec.split(",")])
        else:
            raise DomainError(f"unknown state string {spec!r}")
    except ValueError as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"cannot parse state string {spec!r}") from exc
    if vec.shape != (3,):
        raise DomainError(f"a Bloch vector needs three components, got {spec!r}")
    bloch_to_density(vec)  # raises if outside the ball
    return vec


def parse_grid(text: str) -> list[int]:
    """``A:B`` gives the powers of two from A to B; ``a,b,c`` gives a list."""
    if ":" in text:
        lo, hi = (int(v) for v in text.split(":"))
        if lo < 1 or hi < lo:
            raise DomainError(f"bad grid {text!r}")
        out, n = [], lo
        while n <= hi:
            out.append(n)
            n *= 2
        return out
    return [int(v) for v in text.split(",")]


# ---------------------------------------------------------------- records

@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    """One tomography experiment: a scheme, a true state and a shot grid."""

    scheme: str
    state: str
    grid: tuple[int, ...]
    reps: int = 300
    seed: int = 0
    apg: ApgConfig = dataclasses.field(default_factory=ApgConfig)

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise DomainError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        object.__setattr__(self, "grid", tuple(int(n) for n in self.grid))
        if not self.grid:
            raise DomainError("empty shot grid")
        if self.reps < 1:
            raise DomainError("reps must be at least 1")
        minimum = {"collective": 2, "mub": 3, "adaptive": 6}[self.scheme]
        for n in self.grid:
            if n < minimum:
                raise DomainError(f"{self.scheme} needs N >= {minimum}, got {n}")
            if self.scheme == "collective" and n % 2:
                raise DomainError(f"collective scheme needs even N, got {n}")
        parse_state(self.state)

    @property
    def bloch(self) -> np.ndarray:
        return parse_state(self.state)


@dataclasses.dataclass(frozen=True)
class TrialResult:
    scheme: str
    state: str
    N: int
    rep: int
    infidelity: float
    mse: float
    converged: bool
    iterations: int
    estimate: tuple[float, float, float]

    def row(self) -> dict:
        return {"scheme": self.scheme, "state": self.state, "N": self.N, "rep": self.rep,
                "infidelity": repr(self.infidelity), "mse": repr(self.mse),
                "converged": int(self.converged)}


@dataclasses.dataclass(frozen=True)
class SummaryRow:
    scheme: str
    state: str
    N: int
    mean_infid: float
    std_infid: float
    mean_mse: float
    std_mse: float
    gm_infid: float
    coll_infid: float
    gm_mse: float
    coll_mse: float

    def row(self) -> dict:
        out = dataclasses.asdict(self)
        return {k: (repr(v) if isinstance(v, float) else v) for k, v in out.items()}


@dataclasses.dataclass(frozen=True)
class ScalingFit:
    """``1 - F = beta * N**(-p)`` fitted on log-log axes."""

    beta: float
    p: float
    ci95: tuple[float, float]
    rmse: float

    def to_dict(self) -> dict:
        return {"beta": self.beta, "p": self.p, "ci95": list(self.ci95), "rmse": self.rmse}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


# ---------------------------------------------------------------- trials

def run_trial(scheme: str, state: str, n: int, rep: int, seed: int,
              apg: ApgConfig | None = None) -> TrialResult:
    """One repetition: sample ``n`` copies of the state and score the estimate."""
    bloch = parse_state(state)
    rho = bloch_to_density(bloch)
    stream = RngStream(seed, (n, rep))
    if scheme == "collective":
        record = simulate_measurement(tensor(rho, rho), collective_sic_povm(), n // 2, stream)
        est = apg_estimate(record, collective_sic_povm(), apg)
    elif scheme == "mub":
        est = mub_protocol(rho, n, stream)
    elif scheme == "adaptive":
        est = adaptive_two_step_protocol(rho, n, stream)
    else:
        raise DomainError(f"unknown scheme {scheme!r}")
    return TrialResult(scheme, state, n, rep, infidelity(est.qubit, rho),
                       hs_distance_sq(est.qubit, rho), bool(est.converged),
                       int(est.iterations), tuple(float(v) for v in density_to_bloch(est.qubit)))


def _run_chunk(args):
    cfg, jobs = args
    return [run_trial(cfg.scheme, cfg.state, n, rep, cfg.seed, cfg.apg) for n, rep in jobs]


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> tuple[list[TrialResult], list[SummaryRow]]:
    """Run every ``(N, rep)`` trial and summarise per ``N``.

    With ``workers > 1`` the trials are spread over a process pool; results
    are sorted by ``(N, rep)`` so the output is identical either way.
    """
    jobs = [(n, rep) for n in cfg.grid for rep in range(cfg.reps)]
    if workers <= 1:
        trials = _run_chunk((cfg, jobs))
    else:
        chunks = [jobs[k::workers] for k in range(workers)]
        with concurrent.futures.ProcessPoolExecutor(workers) as pool:
            trials = [t for part in pool.map(_run_chunk, [(cfg, c) for c in chunks]) for t in part]
    trials.sort(key=lambda t: (t.N, t.rep))
    return trials, summarize(trials)


def _std(values: np.ndarray) -> float:
    return float(np.std(values, ddof=1)) if len(values) > 1 else 0.0


def summarize(trials: Sequence[TrialResult]) -> list[SummaryRow]:
    """Mean and standard deviation over repetitions per ``(scheme, state, N)``."""
    groups: dict[tuple, list[TrialResult]] = {}
    for t in trials:
        groups.setdefault((t.scheme, t.state, t.N), []).append(t)
    rows = []
    for (scheme, state, n), group in sorted(groups.items(), key=lambda kv: kv[0][2]):
        infid = np.array([t.infidelity for t in group])
        mse = np.array([t.mse for t in group])
        s = min(float(np.linalg.norm(parse_state(state))), 1.0)
        gi, gm = gm_bounds(s, n)
        ci, cm = collective_bounds(s, n)
        rows.append(SummaryRow(scheme, state, n, float(infid.mean()), _std(infid),
                               float(mse.mean()), _std(mse), gi, ci, gm, cm))
    return rows


def _write_csv(fields, rows) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def trials_to_csv(trials: Iterable[TrialResult]) -> str:
    return _write_csv(TRIAL_FIELDS, [t.row() for t in trials])


def summary_to_csv(rows: Iterable[SummaryRow]) -> str:
    return _write_csv(SUMMARY_FIELDS, [r.row() for r in rows])


# ---------------------------------------------------------------- fitting

def fit_power_law(points: Sequence[tuple[float, float]]) -> ScalingFit:
    """Least-squares fit of ``ln y = ln beta - p ln N``.

    The 95% interval for ``p`` is the t-interval of the regression slope.

    Raises
    ------
    NonPositiveMean
        If any mean is not strictly positive.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
        raise DomainError("need at least three (N, mean) points")
    if np.any(pts[:, 1] <= 0) or np.any(pts[:, 0] <= 0):
        raise NonPositiveMean("power-law fits need positive N and positive means")
    x, y = np.log(pts[:, 0]), np.log(pts[:, 1])
    res = stats.linregress(x, y)
    resid = y - (res.intercept + res.slope * x)
    half = stats.t.ppf(0.975, len(x) - 2) * res.stderr
    p = -res.slope
    return ScalingFit(float(math.exp(res.intercept)), float(p),
                      (float(p - half), float(p + half)), float(np.sqrt(np.mean(resid ** 2))))


def fit_summary(rows: Sequence[SummaryRow]) -> ScalingFit:
    return fit_power_law([(r.N, r.mean_infid) for r in rows])


# ---------------------------------------------------------------- figures

@dataclasses.dataclass(frozen=True)
class VerificationRow:
    input: str
    ideal: tuple[float, ...]
    frequencies: tuple[float, ...]
    z_scores: tuple[float, ...]
    flagged: bool

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def reproduce_fig3_verification(n_per_input: int = 100000, seed: int = 0,
                                n_sigma: float = 5.0) -> list[VerificationRow]:
    """Send each normalised effect through the walk and compare counts to ideal.

    An outcome is flagged if its frequency deviates from the ideal
    probability by more than ``n_sigma`` multinomial standard deviations
    (any count on a zero-probability outcome is flagged).
    """
    povm = collective_sic_povm()
    rows = []
    for j, label in enumerate(povm.labels):
        state = normalized_element(povm, j)
        _, ideal = run_walk(state)
        ideal = np.clip(ideal, 0.0, 1.0)
        ideal = ideal / ideal.sum()
        record = multinomial_sample(ideal, n_per_input, RngStream(seed, (j,)))
        freq = record.frequencies
        sigma = np.sqrt(ideal * (1 - ideal) / n_per_input)
        dev = freq - ideal
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(sigma > 0, dev / np.where(sigma > 0, sigma, 1),
                         np.where(np.abs(dev) > 0, np.inf, 0.0))
        rows.append(VerificationRow(f"{label}hat", tuple(float(v) for v in ideal),
                                    tuple(float(v) for v in freq), tuple(float(v) for v in z),
                                    bool(np.any(np.abs(z) > n_sigma))))
    return rows


def sweep_theta(n: int, thetas: Sequence[float], reps: int = 300, seed: int = 0,
                schemes: Sequence[str] = SCHEMES, workers: int = 1) -> dict:
    """Mean infidelity of each scheme for the pure states ``psi(theta)``.

    Returns ``{"rows": [...SummaryRow], "collective_flatness": max/min}``.
    """
    rows = []
    for scheme in schemes:
        for theta in thetas:
            cfg = ExperimentConfig(scheme, f"pure:{theta:g}", (n,), reps, seed)
            rows.extend(run_experiment(cfg, workers)[1])
    coll = [r.mean_infid for r in rows if r.scheme == "collective"]
    flat = max(coll) / min(coll) if coll else float("nan")
    return {"rows": rows, "collective_flatness": flat}


def sweep_purity(n: int, direction: Sequence[float], s_grid: Sequence[float], reps: int = 300,
                 seed: int = 0, schemes: Sequence[str] = ("collective",),
                 workers: int = 1) -> list[SummaryRow]:
    """Mean infidelity and MSE against Bloch length along ``direction``.

    Summary rows carry the single-copy and collective bounds at each length.
    """
    d = np.asarray(direction, dtype=float)
    if d.shape != (3,) or abs(np.linalg.norm(d) - 1) > 1e-3:
        raise DomainError("direction must be a unit 3-vector")
    d = d / np.linalg.norm(d)
    rows = []
    for scheme in schemes:
        for s in s_grid:
            vec = s * d
            spec = "bloch:" + ",".join(repr(float(v)) for v in vec)
            rows.extend(run_experiment(ExperimentConfig(scheme, spec, (n,), reps, seed), workers)[1])
    return rows
