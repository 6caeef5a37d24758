import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from collective_walk.core import (SINGLET, bloch_to_density, projector,
                                  random_bloch, random_density, random_pure, state_fidelity, tensor)
from collective_walk.estimation.apg import ApgConfig, apg_estimate
from collective_walk.estimation.likelihood import log_likelihood
from collective_walk.povm import collective_sic_povm, outcome_probabilities, qubit_sic_states
from collective_walk.sampling import MeasurementRecord, RngStream, simulate_measurement

POVM = collective_sic_povm()


def random_two_copy_record(rng, n, seed):
    rho = random_density(2, rng)
    return rho, simulate_measurement(tensor(rho, rho), POVM, n, RngStream(seed))


class TestLogLikelihood:
    def test_singlet_certain(self):
        ll = log_likelihood(projector(SINGLET), MeasurementRecord([0, 0, 0, 0, 50]), POVM)
        assert ll.value == pytest.approx(0, abs=1e-12)

    def test_gradient_hermitian(self, rng):
        for k in range(10):
            _, rec = random_two_copy_record(rng, 100, k)
            g = log_likelihood(random_density(4, rng), rec, POVM).gradient
            np.testing.assert_allclose(g, g.conj().T, atol=1e-12)

    def test_nonpositive(self, rng):
        _, rec = random_two_copy_record(rng, 100, 1)
        assert log_likelihood(random_density(4, rng), rec, POVM).value <= 0

    def test_gradient_matches_finite_differences(self, rng):
        for k in range(20):
            _, rec = random_two_copy_record(rng, 500, k)
            rho2 = random_density(4, rng)
            h = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            delta = (h + h.conj().T) / 2
            delta -= np.trace(delta) * np.eye(4) / 4
            step = 1e-3 * np.min(np.linalg.eigvalsh(rho2)) / np.max(np.abs(np.linalg.eigvalsh(delta)))

            def f(t):
                return log_likelihood(rho2 + t * delta, rec, POVM).value

            # fourth-order central difference
            fd = (8 * (f(step) - f(-step)) - (f(2 * step) - f(-2 * step))) / (12 * step)
            analytic = np.real(np.trace(log_likelihood(rho2, rec, POVM).gradient @ delta))
            assert fd == pytest.approx(analytic, rel=1e-6, abs=1e-9)

    def test_truth_maximises_exact_data(self, rng):
        rho = random_density(2, rng)
        p = outcome_probabilities(tensor(rho, rho), POVM)
        best = log_likelihood(tensor(rho, rho), p, POVM).value
        for _ in range(100):
            other = bloch_to_density(0.999 * random_bloch(rng))
            other = 0.9 * rho + 0.1 * other
            assert log_likelihood(tensor(other, other), p, POVM).value <= best + 1e-15

    def test_outcome_mismatch(self):
        with pytest.raises(ValueError):
            log_likelihood(np.eye(4) / 4, MeasurementRecord([1, 2]), POVM)


class TestApgConfig:
    def test_defaults(self):
        cfg = ApgConfig()
        assert (cfg.epsilon0, cfg.beta, cfg.p_floor, cfg.tol, cfg.max_iters) == (0.3, 0.5, 1e-12, 1e-10, 2000)

    @pytest.mark.parametrize("kwargs", [{"beta": 1.0}, {"beta": 0.0}, {"tol": 0.0}, {"epsilon0": -1.0}])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            ApgConfig(**kwargs)


class TestApgEstimate:
    def test_noiseless_recovery(self, rng):
        for k in range(100):
            rho = projector(random_pure(2, rng)) if k % 2 else random_density(2, rng)
            p = outcome_probabilities(tensor(rho, rho), POVM)
            est = apg_estimate(p, POVM)
            assert state_fidelity(est.qubit, rho) >= 1 - 1e-8

    def test_all_counts_on_e1(self):
        est = apg_estimate(MeasurementRecord([1000, 0, 0, 0, 0]), POVM)
        assert state_fidelity(est.qubit, qubit_sic_states()[0]) >= 1 - 1e-6

    def test_single_singlet_count_prefers_centre(self):
        est = apg_estimate(MeasurementRecord([0, 0, 0, 0, 1]), POVM)
        assert np.linalg.norm(est.bloch) < 1e-6

    def test_monotone_history(self, rng):
        for k in range(50):
            _, rec = random_two_copy_record(rng, 128, 100 + k)
            hist = np.array(apg_estimate(rec, POVM, keep_history=True).history)
            assert np.all(np.diff(hist) >= -1e-15)

    def test_estimate_is_state(self, rng):
        _, rec = random_two_copy_record(rng, 64, 3)
        est = apg_estimate(rec, POVM)
        assert np.linalg.norm(est.bloch) <= 1 + 1e-12
        assert np.trace(est.qubit).real == pytest.approx(1)

    def test_not_converged_flag(self, rng):
        _, rec = random_two_copy_record(rng, 256, 4)
        est = apg_estimate(rec, POVM, ApgConfig(max_iters=1), polish=False)
        assert not est.converged and est.iterations == 1

    def test_json(self, rng):
        _, rec = random_two_copy_record(rng, 64, 5)
        data = json.loads(apg_estimate(rec, POVM).to_json())
        assert set(data) == {"bloch", "iters", "final_loglik", "converged"}
        assert len(data["bloch"]) == 3

    def test_deterministic(self, rng):
        _, rec = random_two_copy_record(rng, 128, 6)
        a, b = apg_estimate(rec, POVM), apg_estimate(rec, POVM)
        np.testing.assert_array_equal(a.qubit, b.qubit)

    def test_at_least_as_likely_as_truth(self, rng):
        for k in range(20):
            rho, rec = random_two_copy_record(rng, 256, 200 + k)
            est = apg_estimate(rec, POVM)
            truth = log_likelihood(tensor(rho, rho), rec, POVM).value
            assert est.final_loglik >= truth - 1e-9

    @settings(max_examples=15, deadline=None)
    @given(st.floats(0, 1), st.integers(0, 10 ** 6))
    def test_frequency_vector_equals_record(self, s, seed):
        rho = bloch_to_density(s * np.array([0.0, 0.6, 0.8]))
        rec = simulate_measurement(tensor(rho, rho), POVM, 200, RngStream(seed))
        a = apg_estimate(rec, POVM)
        b = apg_estimate(rec.frequencies, POVM)
        np.testing.assert_allclose(a.qubit, b.qubit, atol=1e-15)
