import csv
import io
import json

import numpy as np
import pytest

from collective_walk import harness
from collective_walk.errors import BlochOutOfBall, DomainError, NonPositiveMean
from collective_walk.harness import (ExperimentConfig, fit_power_law, parse_grid, parse_state,
                                     reproduce_fig3_verification, run_experiment, summary_to_csv,
                                     sweep_purity, sweep_theta, trials_to_csv)


class TestParseState:
    @pytest.mark.parametrize("text, expected", [
        ("bloch:0,0,1", [0, 0, 1]),
        ("0.1,0.2,0.3", [0.1, 0.2, 0.3]),
        ("pure:0", [0, 0, -1]),
        ("pure:45", [1, 0, 0]),
        ("pure:90", [0, 0, 1]),
        ("psi1", [0, 0, 1]),
        ("E1hat", [0, 0, 1]),
        ("s1:0.5", [0, 0, -0.5]),
    ])
    def test_state_strings(self, text, expected):
        np.testing.assert_allclose(parse_state(text), expected, atol=1e-15)

    def test_s2_direction(self):
        np.testing.assert_allclose(parse_state("s2:1"), [0.490, -0.631, 0.602], atol=1e-3)
        assert np.linalg.norm(parse_state("s2:0.469")) == pytest.approx(0.469)

    def test_sic_presets_tetrahedral(self):
        vecs = np.array([parse_state(f"psi{k}") for k in range(1, 5)])
        np.testing.assert_allclose(vecs @ vecs.T, np.where(np.eye(4) > 0, 1, -1 / 3), atol=1e-12)

    @pytest.mark.parametrize("text", ["E5hat", "bloch:1,2", "nonsense", "s1:2", "pure:x"])
    def test_invalid(self, text):
        with pytest.raises(DomainError):
            parse_state(text)

    def test_outside_ball(self):
        with pytest.raises(BlochOutOfBall):
            parse_state("bloch:1,1,1")


class TestGrid:
    def test_powers(self):
        assert parse_grid("16:2048") == [16, 32, 64, 128, 256, 512, 1024, 2048]

    def test_list(self):
        assert parse_grid("10,20") == [10, 20]

    def test_bad(self):
        with pytest.raises(DomainError):
            parse_grid("8:4")


class TestConfig:
    def test_collective_even(self):
        with pytest.raises(DomainError):
            ExperimentConfig("collective", "bloch:0,0,1", (15,))

    def test_scheme(self):
        with pytest.raises(DomainError):
            ExperimentConfig("magic", "bloch:0,0,1", (16,))

    def test_reps(self):
        with pytest.raises(DomainError):
            ExperimentConfig("mub", "bloch:0,0,1", (16,), reps=0)


class TestFitPowerLaw:
    def test_exact_inverse(self):
        ns = np.array([16, 32, 64, 128, 256])
        fit = fit_power_law(list(zip(ns, 0.8 / ns)))
        assert fit.p == pytest.approx(1, abs=1e-9) and fit.beta == pytest.approx(0.8, abs=1e-9)
        assert fit.rmse < 1e-12

    def test_exact_sqrt(self):
        ns = np.array([16, 64, 256, 1024])
        assert fit_power_law(list(zip(ns, 2 * ns ** -0.5))).p == pytest.approx(0.5, abs=1e-9)

    def test_ci_contains_p(self, rng):
        ns = 2.0 ** np.arange(4, 12)
        ys = 0.5 * ns ** -0.7 * np.exp(rng.normal(0, 0.05, len(ns)))
        fit = fit_power_law(list(zip(ns, ys)))
        assert fit.ci95[0] < fit.p < fit.ci95[1]

    def test_ci_matches_t_interval(self, rng):
        # independent t-interval: slope +- t * sqrt(s^2 / Sxx)
        from scipy import stats
        ns = 2.0 ** np.arange(4, 12)
        ys = ns ** -1.0 * np.exp(rng.normal(0, 0.1, len(ns)))
        x, y = np.log(ns), np.log(ys)
        slope, icpt = np.polyfit(x, y, 1)
        resid = y - (icpt + slope * x)
        se = np.sqrt(resid @ resid / (len(x) - 2) / np.sum((x - x.mean()) ** 2))
        half = stats.t.ppf(0.975, len(x) - 2) * se
        fit = fit_power_law(list(zip(ns, ys)))
        assert fit.p == pytest.approx(-slope)
        assert fit.ci95[1] - fit.p == pytest.approx(half)

    def test_nonpositive(self):
        with pytest.raises(NonPositiveMean):
            fit_power_law([(16, 0.1), (32, 0.0), (64, 0.01)])

    def test_too_few(self):
        with pytest.raises(DomainError):
            fit_power_law([(16, 0.1), (32, 0.05)])

    def test_json(self):
        fit = fit_power_law([(16, 0.1), (32, 0.05), (64, 0.025)])
        assert set(json.loads(fit.to_json())) == {"beta", "p", "ci95", "rmse"}


class TestRunExperiment:
    CFG = ExperimentConfig("collective", "bloch:0.3,0.2,0.1", (16, 64), reps=5, seed=3)

    def test_shapes_and_order(self):
        trials, rows = run_experiment(self.CFG)
        assert [(t.N, t.rep) for t in trials] == [(n, r) for n in (16, 64) for r in range(5)]
        assert [r.N for r in rows] == [16, 64]
        assert all(0 <= t.infidelity <= 1 and t.mse >= 0 for t in trials)

    def test_deterministic_csv(self):
        a = trials_to_csv(run_experiment(self.CFG)[0])
        b = trials_to_csv(run_experiment(self.CFG)[0])
        assert a == b
        assert a.splitlines()[0] == "scheme,state,N,rep,infidelity,mse,converged"

    def test_workers_do_not_change_output(self):
        a = trials_to_csv(run_experiment(self.CFG, workers=1)[0])
        b = trials_to_csv(run_experiment(self.CFG, workers=2)[0])
        assert a == b

    def test_summary_recomputable_from_csv(self):
        trials, rows = run_experiment(self.CFG)
        table = list(csv.DictReader(io.StringIO(trials_to_csv(trials))))
        summary = list(csv.DictReader(io.StringIO(summary_to_csv(rows))))
        assert list(summary[0]) == list(harness.SUMMARY_FIELDS)
        for row in summary:
            vals = np.array([float(t["infidelity"]) for t in table if t["N"] == row["N"]])
            mses = np.array([float(t["mse"]) for t in table if t["N"] == row["N"]])
            assert float(row["mean_infid"]) == float(vals.mean())
            assert float(row["std_infid"]) == float(np.std(vals, ddof=1))
            assert float(row["mean_mse"]) == float(mses.mean())

    def test_different_seeds_differ(self):
        a = run_experiment(self.CFG)[0]
        b = run_experiment(ExperimentConfig("collective", "bloch:0.3,0.2,0.1", (16, 64), 5, 4))[0]
        assert [t.infidelity for t in a] != [t.infidelity for t in b]

    @pytest.mark.parametrize("scheme", ["mub", "adaptive"])
    def test_single_copy_schemes(self, scheme):
        trials, rows = run_experiment(ExperimentConfig(scheme, "pure:30", (64,), 4, 0))
        assert len(trials) == 4 and rows[0].gm_infid == pytest.approx(9 / 256)

    def test_scheme_ordering_at_2048(self):
        """collective < adaptive < MUB on a generic pure state, 5 sigma on the differences."""
        state = "bloch:0.7071067811865476,0,0.7071067811865476"
        means = {}
        for scheme in ("collective", "adaptive", "mub"):
            trials, _ = run_experiment(ExperimentConfig(scheme, state, (2048,), 1000, 11))
            means[scheme] = np.array([t.infidelity for t in trials])

        def z(a, b):
            d = means[b] - means[a]
            return d.mean() / (d.std(ddof=1) / np.sqrt(len(d)))

        assert z("collective", "adaptive") > 5
        assert z("adaptive", "mub") > 5


class TestFigures:
    def test_verification(self):
        rows = reproduce_fig3_verification(100000, seed=0)
        assert len(rows) == 5
        assert not any(r.flagged for r in rows)
        np.testing.assert_allclose(rows[0].ideal, [0.75, 1 / 12, 1 / 12, 1 / 12, 0], atol=1e-14)
        assert rows[4].frequencies[4] == 1.0
        assert rows[2].ideal[1] == pytest.approx(1 / 12)

    def test_sweep_theta(self):
        out = sweep_theta(128, [0, 45, 90], reps=5, schemes=("collective", "mub"))
        assert len(out["rows"]) == 6
        assert out["collective_flatness"] >= 1

    def test_sweep_purity(self):
        rows = sweep_purity(256, [0, 0, 1], [0.0, 0.5], reps=5)
        assert [r.N for r in rows] == [256, 256]
        assert rows[0].coll_mse == pytest.approx(3 / 256)

    def test_sweep_purity_direction(self):
        with pytest.raises(DomainError):
            sweep_purity(256, [1, 1, 0], [0.5], reps=1)
