"""Command-line entry points (``python -m collective_walk <command> ...``)."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import harness
from .core import KET0, KET1, SINGLET, bloch_to_density, check_normalized_ket, tensor
from .errors import CollectiveWalkError
from .estimation.apg import ApgConfig
from .estimation.bounds import bounds_report
from .estimation.detector import detector_tomography, pauli_product_inputs
from .optics import decompose_coin, phase_residual
from .povm import collective_sic_povm, element_fidelities, povm_fidelity, qubit_sic_states
from .sampling import RngStream, simulate_measurement
from .walk import collective_sic_schedule, extract_induced_povm, run_walk, trace_to_json, walk_trace


def _two_qubit_input(text: str):
    """Ket or density matrix named on the command line for the walk."""
    t = text.strip()
    low = t.lower()
    sic = qubit_sic_states()
    names = {f"psi{i + 1}": s for i, s in enumerate(sic)}
    basis = {"0": KET0, "1": KET1}
    if low == "singlet" or low == "e5hat":
        return SINGLET
    if low.startswith("e") and low.endswith("hat") and low[1:-3] in "1234":
        s = sic[int(low[1]) - 1]
        return tensor(s, s)
    if low.count("psi") == 2:
        a, b = low[:4], low[4:]
        if a in names and b in names:
            return tensor(names[a], names[b])
    if len(low) == 2 and all(ch in basis for ch in low):
        return tensor(basis[low[0]], basis[low[1]])
    if low.startswith("bloch:"):
        rho = bloch_to_density([float(v) for v in t[6:].split(",")])
        return tensor(rho, rho)
    parts = t.split(",")
    if len(parts) == 4:
        return check_normalized_ket(np.array([complex(p.replace(" ", "")) for p in parts]))
    raise CollectiveWalkError(f"cannot interpret walk input {text!r}")


def _apg_config(args) -> ApgConfig:
    return ApgConfig(epsilon0=args.apg_eps, beta=args.apg_beta, tol=args.apg_tol,
                     max_iters=args.apg_max_iters)


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_verify_povm(args) -> int:
    ideal = collective_sic_povm()
    schedule, detectors = collective_sic_schedule()
    induced = extract_induced_povm(schedule, detectors)
    fid = povm_fidelity(induced, ideal)
    print(f"completeness_residual {ideal.completeness_residual():.3e}")
    print(f"induced_completeness_residual {induced.completeness_residual():.3e}")
    print(f"induced_vs_ideal_fidelity {fid:.15f}")
    ok = 1 - fid <= args.tol and ideal.completeness_residual() <= args.tol
    print("OK" if ok else "FAIL")
    return 0 if ok else 1


def cmd_walk(args) -> int:
    state = _two_qubit_input(args.input)
    if args.emit == "json":
        if state.ndim != 1:
            raise CollectiveWalkError("step-by-step amplitudes need a pure input")
        print(trace_to_json(walk_trace(state), indent=1))
    else:
        _, probs = run_walk(state)
        for label, p in zip(collective_sic_povm().labels, probs):
            print(f"{label} {p:.12f}")
    return 0


def cmd_decompose_coins(args) -> int:
    schedule, _ = collective_sic_schedule()
    out = []
    for (x, t), coin in sorted(schedule.table.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        stack, phase = decompose_coin(coin)
        res, _ = phase_residual(stack.unitary(), coin)
        out.append({"position": x, "step": t,
                    "plates": [{"kind": k, "angle": a} for k, a in stack.plates],
                    "global_phase": [phase.real, phase.imag], "residual": res})
    print(json.dumps(out, indent=1))
    return 0


def cmd_tomo(args) -> int:
    cfg = harness.ExperimentConfig(args.scheme, args.state, (args.shots,), args.reps, args.seed,
                                   _apg_config(args))
    trials, rows = harness.run_experiment(cfg, args.workers)
    _emit(harness.trials_to_csv(trials), args.out)
    if args.out:
        sys.stdout.write(harness.summary_to_csv(rows))
    return 0


def cmd_scaling(args) -> int:
    cfg = harness.ExperimentConfig(args.scheme, args.state, tuple(harness.parse_grid(args.grid)),
                                   args.reps, args.seed, _apg_config(args))
    trials, rows = harness.run_experiment(cfg, args.workers)
    fit = harness.fit_summary(rows)
    if args.out:
        _emit(harness.trials_to_csv(trials), args.out + "_trials.csv")
        _emit(harness.summary_to_csv(rows), args.out + "_summary.csv")
        _emit(fit.to_json() + "\n", args.out + "_fit.json")
    sys.stdout.write(harness.summary_to_csv(rows))
    print(fit.to_json())
    return 0


def cmd_sweep_theta(args) -> int:
    thetas = [float(v) for v in args.thetas.split(",")]
    result = harness.sweep_theta(args.shots, thetas, args.reps, args.seed,
                                 tuple(args.schemes.split(",")), args.workers)
    sys.stdout.write(harness.summary_to_csv(result["rows"]))
    print(json.dumps({"collective_flatness": result["collective_flatness"]}))
    return 0


def cmd_sweep_purity(args) -> int:
    direction = [float(v) for v in args.direction.split(",")]
    s_grid = [float(v) for v in args.s_grid.split(",")]
    rows = harness.sweep_purity(args.shots, direction, s_grid, args.reps, args.seed,
                                tuple(args.schemes.split(",")), args.workers)
    sys.stdout.write(harness.summary_to_csv(rows))
    return 0


def cmd_detector_tomo(args) -> int:
    povm = collective_sic_povm()
    inputs = pauli_product_inputs()
    records = [simulate_measurement(rho, povm, args.shots, RngStream(args.seed, (i,)))
               for i, rho in enumerate(inputs)]
    est = detector_tomography(inputs, records, len(povm), labels=povm.labels)
    print(json.dumps({
        "povm_fidelity": povm_fidelity(est.povm, povm),
        "element_fidelities": dict(zip(povm.labels, element_fidelities(est.povm, povm).tolist())),
        "iterations": est.iterations, "converged": est.converged,
        "final_loglik": est.final_loglik,
    }, indent=1))
    return 0


def cmd_bounds(args) -> int:
    print(json.dumps(bounds_report(args.s, args.shots).to_dict(), indent=1))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="collective-walk",
                                     description="Collective two-copy qubit tomography via a quantum walk.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-povm", help="check the walk realises the collective SIC-POVM")
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_verify_povm)

    p = sub.add_parser("walk", help="run the walk on a two-qubit input")
    p.add_argument("--input", required=True,
                   help="psiIpsiJ, E1hat..E5hat, singlet, 00..11, bloch:x,y,z, or four amplitudes a,b,c,d")
    p.add_argument("--emit", choices=("json", "probs"), default="probs")
    p.set_defaults(func=cmd_walk)

    p = sub.add_parser("decompose-coins", help="wave-plate stacks for every coin")
    p.set_defaults(func=cmd_decompose_coins)

    def add_run(p, shots_default=None):
        p.add_argument("--reps", type=int, default=300)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--apg-eps", type=float, default=ApgConfig.epsilon0)
        p.add_argument("--apg-beta", type=float, default=ApgConfig.beta)
        p.add_argument("--apg-tol", type=float, default=ApgConfig.tol)
        p.add_argument("--apg-max-iters", type=int, default=ApgConfig.max_iters)
        if shots_default is not None:
            p.add_argument("--shots", type=int, default=shots_default)

    p = sub.add_parser("tomo", help="repeated tomography at one sample size (trial CSV)")
    p.add_argument("--scheme", choices=harness.SCHEMES, required=True)
    p.add_argument("--state", required=True)
    p.add_argument("--out")
    add_run(p, 256)
    p.set_defaults(func=cmd_tomo)

    p = sub.add_parser("scaling", help="mean infidelity over a shot grid with power-law fit")
    p.add_argument("--scheme", choices=harness.SCHEMES, required=True)
    p.add_argument("--state", required=True)
    p.add_argument("--grid", default="16:2048")
    p.add_argument("--out", help="prefix for _trials.csv, _summary.csv and _fit.json")
    add_run(p)
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("sweep-theta", help="mean infidelity across pure states psi(theta)")
    p.add_argument("--thetas", default="0,10,20,30,40,50,60,70,80,90")
    p.add_argument("--schemes", default="collective,mub,adaptive")
    add_run(p, 1024)
    p.set_defaults(func=cmd_sweep_theta)

    p = sub.add_parser("sweep-purity", help="infidelity and MSE against Bloch length")
    p.add_argument("--direction", default=",".join(f"{v:.6f}" for v in harness.S2_DIRECTION))
    p.add_argument("--s-grid", default="0,0.1,0.2,0.3,0.469,0.5,0.6,0.674,0.8,0.9")
    p.add_argument("--schemes", default="collective")
    add_run(p, 256)
    p.set_defaults(func=cmd_sweep_purity)

    p = sub.add_parser("detector-tomo", help="reconstruct the collective POVM from Pauli-product probes")
    p.add_argument("--shots", type=int, default=35000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_detector_tomo)

    p = sub.add_parser("bounds", help="single-copy and collective precision bounds")
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--shots", type=int, required=True)
    p.set_defaults(func=cmd_bounds)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CollectiveWalkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
