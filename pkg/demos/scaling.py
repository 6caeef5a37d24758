"""Mean-infidelity scaling of the three tomography schemes.

Fits N^-p to the mean infidelity over N = 16..2048 for a pole state and two
generic pure states, then reports the scheme ratios at the largest N.

Run: python3 demos/scaling.py [--reps 300] [--seed 0] [--workers 1]
"""

import argparse

from collective_walk import harness

STATES = {
    "(0,0,1)": "0,0,1",
    "(1,0,1)/sqrt2": "0.7071067811865476,0,0.7071067811865476",
    "(1,1,1)/sqrt3": "0.5773502691896258,0.5773502691896258,0.5773502691896258",
}


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--reps", type=int, default=300)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--grid", default="16:2048")
    args = parser.parse_args()
    grid = tuple(harness.parse_grid(args.grid))

    print(f"{'scheme':>10s} {'state':>14s} {'p':>6s}  95% CI          infidelity at N={grid[-1]}")
    for label, state in STATES.items():
        last = {}
        for scheme in harness.SCHEMES:
            cfg = harness.ExperimentConfig(scheme, state, grid, args.reps, args.seed)
            _, rows = harness.run_experiment(cfg, args.workers)
            fit = harness.fit_summary(rows)
            last[scheme] = rows[-1].mean_infid
            lo, hi = fit.ci95
            print(f"{scheme:>10s} {label:>14s} {fit.p:6.3f}  [{lo:.3f}, {hi:.3f}]  {last[scheme]:.3e}")
        print(f"{'':>10s} {label:>14s} ratios at N={grid[-1]}: "
              f"mub/collective {last['mub'] / last['collective']:.1f}, "
              f"adaptive/collective {last['adaptive'] / last['collective']:.1f}")


if __name__ == "__main__":
    main()
