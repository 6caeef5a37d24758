import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from collective_walk.core import SINGLET, random_density, random_pure, tensor
from collective_walk.errors import IncompleteDetectorCover, LatticeOverflow, NotNormalized
from collective_walk.povm import collective_sic_povm, outcome_probabilities, povm_fidelity, qubit_sic_states
from collective_walk.walk import (EARLY_DETECTORS, X_MAX, CoinSchedule, DetectorMap,
                                  WalkerCoinState, collective_sic_schedule, early_detection_equivalence,
                                  encode_ket, encode_two_qubit, evolve_step, extract_induced_povm,
                                  run_walk, trace_to_json, walk_trace)

from oracles import R2, R3, detector_closed_form, step_one_closed_form

ket_strategy = st.lists(st.tuples(st.floats(-1, 1), st.floats(-1, 1)), min_size=4, max_size=4).map(
    lambda xs: np.array([complex(a, b) for a, b in xs])).filter(lambda v: np.linalg.norm(v) > 1e-3).map(
    lambda v: v / np.linalg.norm(v))


class TestSchedule:
    def test_nine_coins(self):
        schedule, _ = collective_sic_schedule()
        assert sorted(schedule.table) == sorted([(-1, 1), (-2, 2), (0, 2), (2, 2), (1, 3), (-1, 3),
                                                 (0, 4), (-2, 4), (-1, 5)])

    def test_first_coin(self):
        schedule, _ = collective_sic_schedule()
        np.testing.assert_allclose(schedule.coin(-1, 1), np.array([[1, R2], [R2, -1]]) / R3)

    @pytest.mark.parametrize("a, b", [((2, 2), (0, 2)), ((-1, 3), (-1, 1)), ((-2, 4), (-2, 2))])
    def test_repeated_coins(self, a, b):
        schedule, _ = collective_sic_schedule()
        np.testing.assert_array_equal(schedule.coin(*a), schedule.coin(*b))

    def test_coins_unitary(self):
        schedule, _ = collective_sic_schedule()
        for c in schedule.table.values():
            np.testing.assert_allclose(c @ c.conj().T, np.eye(2), atol=1e-12)

    def test_default_identity(self):
        schedule, _ = collective_sic_schedule()
        np.testing.assert_array_equal(schedule.coin(5, 1), np.eye(2))

    def test_detector_map(self):
        _, detectors = collective_sic_schedule()
        assert detectors(2) == 4 and detectors(6) == 0 and detectors(-2) == 3
        assert detectors.position_of(2) == 0

    def test_rejects_non_unitary(self):
        with pytest.raises(ValueError):
            CoinSchedule(1, {(0, 1): np.array([[1, 1], [0, 1]])})

    def test_detector_map_cover(self):
        with pytest.raises(ValueError):
            DetectorMap({0: 0, 1: 0}, n_outcomes=2)


class TestEncoding:
    def test_basis_slot(self):
        st_ = encode_ket(np.array([1, 0, 0, 0]))
        assert st_.amplitude(1, 0) == 1

    def test_singlet(self):
        st_ = encode_ket(SINGLET)
        assert st_.amplitude(1, 1) == pytest.approx(1 / R2)
        assert st_.amplitude(-1, 0) == pytest.approx(-1 / R2)

    def test_maximally_mixed_branches(self):
        branches = encode_two_qubit(np.eye(4) / 4)
        assert len(branches) == 4
        assert all(w == pytest.approx(0.25) for w, _ in branches)

    def test_unnormalised(self):
        with pytest.raises(NotNormalized):
            encode_two_qubit(np.array([1.0, 1.0, 0, 0]))

    def test_json_format(self):
        data = json.loads(trace_to_json(walk_trace(np.array([1, 0, 0, 0]))))
        assert data[0]["step"] == 0
        assert data[0]["entries"] == [{"position": 1, "coin": 0, "re": 1.0, "im": 0.0}]


class TestEvolution:
    def test_identity_site_shift(self):
        schedule, _ = collective_sic_schedule()
        st_ = evolve_step(WalkerCoinState.basis(3, 0), schedule, 3)
        assert st_.amplitude(4, 0) == 1

    @settings(max_examples=30, deadline=None)
    @given(ket_strategy)
    def test_step_one_closed_form(self, ket):
        schedule, _ = collective_sic_schedule()
        st_ = evolve_step(encode_ket(ket), schedule, 1)
        expected = step_one_closed_form(*ket)
        for (x, c), amp in expected.items():
            assert st_.amplitude(x, c) == pytest.approx(amp, abs=1e-12)
        assert st_.norm_sq() == pytest.approx(1, abs=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(ket_strategy)
    def test_norm_and_parity(self, ket):
        for t, st_ in enumerate(walk_trace(ket)):
            assert st_.norm_sq() == pytest.approx(1, abs=1e-12)
            assert all((x - 1 - t) % 2 == 0 for x, _ in st_.support())

    def test_overflow(self):
        schedule = CoinSchedule(1, {})
        with pytest.raises(LatticeOverflow):
            evolve_step(WalkerCoinState.basis(X_MAX, 0), schedule, 1)


class TestRunWalk:
    def test_psi1_pair(self):
        s = qubit_sic_states()[0]
        _, p = run_walk(tensor(s, s))
        np.testing.assert_allclose(p, [0.75, 1 / 12, 1 / 12, 1 / 12, 0], atol=1e-14)

    def test_singlet(self):
        _, p = run_walk(SINGLET)
        np.testing.assert_allclose(p, [0, 0, 0, 0, 1], atol=1e-14)

    def test_maximally_mixed_qubit_pair(self):
        _, p = run_walk(np.eye(4) / 4)
        np.testing.assert_allclose(p, [3 / 16, 3 / 16, 3 / 16, 3 / 16, 1 / 4], atol=1e-14)

    @settings(max_examples=30, deadline=None)
    @given(ket_strategy)
    def test_detector_closed_form(self, ket):
        final, p = run_walk(ket)
        expected = detector_closed_form(*ket)
        for x, prob in expected.items():
            assert final.probability_at(x) == pytest.approx(prob, abs=1e-12)

    def test_final_support(self, rng):
        final, _ = run_walk(random_pure(4, rng))
        outside = sum(final.probability_at(x) for x in range(-6, 7) if x not in (6, 4, 2, 0, -2))
        assert outside < 1e-12

    def test_agreement_with_povm(self, rng):
        povm = collective_sic_povm()
        for k in range(200):
            rho = random_density(2, rng, rank=1 if k % 2 else 2)
            two = tensor(rho, rho)
            _, p = run_walk(two)
            np.testing.assert_allclose(p, outcome_probabilities(two, povm), atol=1e-10)


class TestInducedPovm:
    def test_matches_ideal(self):
        induced = extract_induced_povm(*collective_sic_schedule())
        assert povm_fidelity(induced, collective_sic_povm()) >= 1 - 1e-10
        np.testing.assert_allclose(induced.effects, collective_sic_povm().effects, atol=1e-12)

    def test_complete(self):
        assert extract_induced_povm(*collective_sic_schedule()).completeness_residual() < 1e-10

    def test_incomplete_cover(self):
        with pytest.raises(IncompleteDetectorCover):
            extract_induced_povm(CoinSchedule(5, {}), DetectorMap({6: 0, -6: 1}, 2))


class TestEarlyDetection:
    def test_report(self):
        report = early_detection_equivalence()
        assert report["ok"] and report["max_deviation"] <= 1e-12
        assert len(report["pairs"]) == len(EARLY_DETECTORS)

    def test_psi1_at_step_two(self):
        s = qubit_sic_states()[0]
        assert walk_trace(tensor(s, s))[2].probability_at(3) == pytest.approx(0.75, abs=1e-14)

    def test_singlet_at_step_four(self):
        assert walk_trace(SINGLET)[4].probability_at(1) == pytest.approx(1, abs=1e-14)
