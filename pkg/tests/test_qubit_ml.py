import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from collective_walk.core import bloch_to_density, random_bloch, state_fidelity
from collective_walk.estimation.qubit_ml import (BasisRecord, adaptive_two_step_protocol,
                                                 aligned_frame, even_split, measure_basis,
                                                 ml_qubit_linear, mub_protocol, mub_records)
from collective_walk.sampling import RngStream

AXES = np.eye(3)


def exact_records(bloch, scale=10 ** 12):
    return [BasisRecord(AXES[a], int(round(scale * (1 + bloch[a]) / 2)),
                        int(round(scale * (1 - bloch[a]) / 2))) for a in range(3)]


def linear_inversion(records):
    """Oracle: per-axis r_a = (n+ - n-) / N, the ML estimate when inside the ball."""
    return np.array([(r.n_plus - r.n_minus) / r.total for r in records])


def loglik(records, bloch):
    total = 0.0
    for r in records:
        c = r.direction @ bloch
        for n, p in ((r.n_plus, (1 + c) / 2), (r.n_minus, (1 - c) / 2)):
            if n:
                total += n * np.log(p)
    return total / sum(r.total for r in records)


class TestSplit:
    def test_2048(self):
        assert even_split(2048) == [683, 683, 682]

    @settings(max_examples=50, deadline=None)
    @given(st.integers(3, 10 ** 6))
    def test_even_split_properties(self, n):
        parts = even_split(n)
        assert sum(parts) == n and max(parts) - min(parts) <= 1 and parts == sorted(parts, reverse=True)


class TestMlQubitLinear:
    def test_maximally_mixed(self):
        est = ml_qubit_linear(exact_records([0, 0, 0]))
        np.testing.assert_allclose(est.qubit, np.eye(2) / 2, atol=1e-8)

    def test_ket0(self):
        est = ml_qubit_linear(exact_records([0, 0, 1]))
        np.testing.assert_allclose(est.qubit, np.diag([1, 0]), atol=1e-8)

    def test_boundary_pure(self):
        r = np.array([1, 0, 1]) / np.sqrt(2)
        est = ml_qubit_linear(exact_records(r))
        assert state_fidelity(est.qubit, bloch_to_density(r)) >= 1 - 1e-8

    def test_matches_linear_inversion_inside(self, rng):
        checked = 0
        for k in range(60):
            truth = bloch_to_density(random_bloch(rng, radius=0.6))
            recs = mub_records(truth, 300, RngStream(k))
            lin = linear_inversion(recs)
            if np.linalg.norm(lin) >= 0.98:
                continue
            np.testing.assert_allclose(ml_qubit_linear(recs).bloch, lin, atol=1e-6)
            checked += 1
        assert checked > 40

    def test_outside_beats_clipped_inversion(self, rng):
        for k in range(30):
            truth = bloch_to_density(random_bloch(rng, radius=1.0))
            recs = mub_records(truth, 60, RngStream(1000 + k))
            lin = linear_inversion(recs)
            if np.linalg.norm(lin) <= 1:
                continue
            est = ml_qubit_linear(recs)
            assert np.linalg.norm(est.bloch) == pytest.approx(1, abs=1e-9)
            assert loglik(recs, est.bloch) >= loglik(recs, lin / np.linalg.norm(lin)) - 1e-12
            for _ in range(50):
                other = random_bloch(rng, radius=1.0)
                assert loglik(recs, est.bloch) >= loglik(recs, other) - 1e-12

    def test_rank_deficient_directions(self):
        recs = [BasisRecord(AXES[0], 5, 5), BasisRecord(AXES[0], 3, 7)]
        with pytest.raises(ValueError):
            ml_qubit_linear(recs)

    def test_converged_flag(self, rng):
        recs = mub_records(bloch_to_density([0.2, 0.1, 0.3]), 900, RngStream(3))
        assert ml_qubit_linear(recs).converged


class TestProtocols:
    def test_mub_allocation(self):
        recs = mub_records(np.eye(2) / 2, 2048, RngStream(0))
        assert [r.total for r in recs] == [683, 683, 682]

    def test_mub_mixed_small_bloch(self):
        lengths = [np.linalg.norm(mub_protocol(np.eye(2) / 2, 10 ** 5, RngStream(0, (k,))).bloch)
                   for k in range(10)]
        # each component has standard deviation sqrt(3 / n) ~ 0.0055
        assert max(lengths) < 0.03 and np.mean(lengths) < 0.02

    def test_mub_needs_three(self):
        with pytest.raises(ValueError):
            mub_protocol(np.eye(2) / 2, 2, RngStream(0))

    def test_adaptive_split_odd(self, monkeypatch):
        import collective_walk.estimation.qubit_ml as qm
        sizes = []
        original = qm.mub_records

        def spy(rho, n, rng, frame=qm.MUB_DIRECTIONS):
            sizes.append(n)
            return original(rho, n, rng, frame)

        monkeypatch.setattr(qm, "mub_records", spy)
        qm.adaptive_two_step_protocol(np.eye(2) / 2, 101, RngStream(0))
        assert sizes == [51, 50]

    def test_adaptive_second_frame_aligned(self):
        frame = aligned_frame([0.3, -0.4, 0.5])
        np.testing.assert_allclose(frame @ frame.T, np.eye(3), atol=1e-12)
        np.testing.assert_allclose(frame[2], np.array([0.3, -0.4, 0.5]) / np.linalg.norm([0.3, -0.4, 0.5]))

    def test_adaptive_pure_state(self):
        rho = bloch_to_density([0, 0, 1])
        infid = np.mean([1 - state_fidelity(adaptive_two_step_protocol(rho, 512, RngStream(1, (k,))).qubit, rho)
                         for k in range(50)])
        assert infid < 0.01

    def test_adaptive_needs_six(self):
        with pytest.raises(ValueError):
            adaptive_two_step_protocol(np.eye(2) / 2, 5, RngStream(0))

    def test_measure_basis_counts(self):
        rec = measure_basis(np.diag([1.0, 0.0]), [0, 0, 1], 100, RngStream(0))
        assert (rec.n_plus, rec.n_minus) == (100, 0)
