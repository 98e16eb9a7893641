import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mpcptd.errors import DomainError, IGPDerivationError
from mpcptd.igp import (
    SpeedProfile,
    check_ranking_invariance,
    plan_degradation,
    derive_igp,
    derive_speed_matrix,
    factorize,
    factorize_network,
    igp_traverse,
    traverse_grid,
)
from mpcptd.planner import RelocationPlan
from mpcptd.tdnet import PiecewiseLinearTT, TDNetwork, TimeHorizon, build_worst_table

from conftest import brute_force_ranking, speed_network

H20 = TimeHorizon(0, 20, (5,))


def numeric_travel(profile, depart, dt=1e-4):
    # crude forward integration oracle
    t, dist = depart, 0.0
    while dist < profile.length:
        dist += profile.distance(t, t + dt)
        t += dt
    return t - depart


class TestTraverse:
    profile = SpeedProfile(10.0, (0.0, 5.0), (2.0, 1.0))

    def test_exact_piece(self):
        assert igp_traverse(self.profile, H20, 0.0) == 5.0

    def test_two_pieces(self):
        assert igp_traverse(self.profile, H20, 3.0) == pytest.approx(8.0)
        assert numeric_travel(self.profile, 3.0) == pytest.approx(8.0, abs=1e-3)

    def test_unit_speed(self):
        p = SpeedProfile(10.0, (0.0,), (1.0,))
        for t in (0.0, 7.5, 20.0):
            assert igp_traverse(p, H20, t) == 10.0

    def test_extends_past_horizon(self):
        assert igp_traverse(self.profile, H20, 18.0) == pytest.approx(10.0)

    def test_bad_length(self):
        with pytest.raises(DomainError):
            SpeedProfile(0.0, (0.0,), (1.0,))
        with pytest.raises(DomainError):
            SpeedProfile(1.0, (0.0, 5.0), (1.0, 0.0))

    def test_vectorised_matches_scalar(self, rng):
        h = TimeHorizon.uniform(6, end=70.0)
        lengths = rng.uniform(5, 30, 4)
        speeds = rng.uniform(0.2, 1, (4, 7))
        grid = traverse_grid(lengths, speeds, h.instants)
        for e in range(4):
            prof = SpeedProfile(lengths[e], tuple(h.instants[:-1]), tuple(speeds[e]))
            for k, t in enumerate(h.instants):
                assert grid[e, k] == pytest.approx(igp_traverse(prof, h, t), rel=1e-12)


class TestDerive:
    def test_constant(self):
        prof = derive_igp(PiecewiseLinearTT.constant(10.0, 0, 20), H20)
        assert prof.length == pytest.approx(10.0)
        assert np.allclose(prof.speeds, 1.0)

    def test_recovers_speed_ratio(self):
        fn = PiecewiseLinearTT.from_pairs([(0, 5), (5, 10), (20, 10)])
        prof = derive_igp(fn, H20)
        v = prof.period_speeds(H20)
        assert v[0] / v[1] == pytest.approx(2.0)
        assert prof.length == pytest.approx(5.0)
        for t in H20.instants:
            assert igp_traverse(prof, H20, t) == pytest.approx(fn(t), abs=1e-9)

    def test_up_down(self):
        fn = PiecewiseLinearTT.from_pairs([(0, 10), (5, 12.5), (20, 5)])
        prof = derive_igp(fn, H20)
        for t in H20.instants:
            assert abs(igp_traverse(prof, H20, t) - fn(t)) <= 1e-9

    def test_slope_minus_one_rejected(self):
        fn = PiecewiseLinearTT.from_pairs([(0, 10), (5, 5), (20, 5)])
        with pytest.raises(IGPDerivationError):
            derive_igp(fn, H20)

    def test_off_grid_rejected(self):
        fn = PiecewiseLinearTT.from_pairs([(0, 10), (7, 12), (20, 10)])
        with pytest.raises(IGPDerivationError):
            derive_igp(fn, H20)

    def test_reference_interval(self, rng):
        net = speed_network(rng, 2, 3, 8)
        rows = net.arc_rows()
        for ref in [(0, 9), (2, 5), (8, 9)]:
            lengths, speeds, tail = derive_speed_matrix(rows, net.horizon, ref)
            assert speeds.shape == (6, ref[1] - ref[0])
            assert np.allclose(speeds.max(axis=1), 1.0)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), M=st.integers(1, 30))
    def test_round_trip(self, seed, M):
        rng = np.random.default_rng(seed)
        net = speed_network(rng, 1, 1, M)
        fn = net.arc(0, 0)
        prof = derive_igp(fn, net.horizon)
        for t in net.horizon.instants:
            assert abs(igp_traverse(prof, net.horizon, t) - fn(t)) <= 1e-9


class TestFactorize:
    def test_example(self):
        f = factorize([[50, 25], [30, 30]])
        assert f.max_speed.tolist() == [50, 30]
        assert f.congestion.tolist() == [1, 1]
        assert f.degradation.tolist() == [[1, 0.5], [1, 1]]
        assert f.min_degradation == 0.5

    def test_common_pattern(self, rng):
        u = rng.uniform(1, 5, 6)
        g = rng.uniform(0.1, 1, 9)
        f = factorize(np.outer(u, g))
        assert np.allclose(f.degradation, 1.0) and f.min_degradation == pytest.approx(1.0)

    def test_single_arc(self, rng):
        f = factorize(rng.uniform(0.1, 2, (1, 7)))
        assert np.all(f.degradation == 1.0) and f.min_degradation == 1.0

    def test_zero_speed(self):
        with pytest.raises(DomainError):
            factorize([[1.0, 0.0]])

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_identities(self, seed):
        rng = np.random.default_rng(seed)
        v = rng.uniform(0.01, 10, (int(rng.integers(1, 12)), int(rng.integers(1, 12))))
        f = factorize(v)
        assert np.all(np.abs(f.reconstruct() - v) <= 1e-12 * np.abs(v))
        assert np.all(f.max_speed == v.max(axis=1))
        assert np.all((0 <= f.degradation) & (f.degradation <= 1))
        star = v.argmax(axis=1)
        rows = np.arange(v.shape[0])
        assert np.all(f.congestion[star] == 1.0) and np.all(f.degradation[rows, star] == 1.0)

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), c=st.floats(0.01, 100))
    def test_scale_invariance(self, seed, c):
        rng = np.random.default_rng(seed)
        v = rng.uniform(0.1, 1, (5, 6))
        w = v.copy()
        w[2] *= c
        assert np.allclose(factorize(v).degradation, factorize(w).degradation, rtol=1e-12)

    def test_network_factorization_common(self, rng):
        net = speed_network(rng, 3, 3, 10, common=True)
        f = factorize_network(net)
        assert f.min_degradation == pytest.approx(1.0, abs=1e-9)


class TestRanking:
    def test_constant(self):
        assert check_ranking_invariance(np.array([[3.0, 3.0], [5.0, 5.0], [1.0, 1.0]])).invariant

    def test_crossing(self):
        res = check_ranking_invariance(np.array([[5.0, 10.0], [8.0, 7.0]]))
        assert not res.invariant
        assert set(res.witness) == {0, 1}
        assert set(res.periods) == {0, 1}

    def test_ties_are_mutual(self):
        assert check_ranking_invariance(np.array([[5.0, 7.0], [5.0, 9.0], [6.0, 9.0]])).invariant

    def test_period_subset(self):
        rows = np.array([[5.0, 10.0, 1.0], [8.0, 12.0, 0.5]])
        assert not check_ranking_invariance(rows).invariant
        assert check_ranking_invariance(rows, [0, 1]).invariant

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_common_pattern_is_invariant(self, seed):
        rng = np.random.default_rng(seed)
        net = speed_network(rng, 3, 4, int(rng.integers(1, 12)), common=True)
        assert check_ranking_invariance(build_worst_table(net)).invariant

    @settings(max_examples=200, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_agrees_with_pairwise(self, seed):
        rng = np.random.default_rng(seed)
        E, M = int(rng.integers(1, 41)), int(rng.integers(1, 13))
        # few distinct values and sorted templates so invariant tables occur too
        if rng.random() < 0.5:
            base = np.sort(rng.integers(0, 5, E))[:, None]
            rows = base + np.sort(rng.integers(0, 3, (E, M)), axis=0)
        else:
            rows = rng.integers(0, 4, (E, M))
        res = check_ranking_invariance(rows.astype(float))
        assert res.invariant == brute_force_ranking(rows)
        if not res.invariant:
            a, b = res.witness
            l1, l2 = res.periods
            assert (rows[a, l1] - rows[b, l1]) * (rows[a, l2] - rows[b, l2]) < 0


class TestPlanDegradation:
    def test_invariant(self):
        from mpcptd.igp import Factorization

        f = Factorization(np.ones(2), np.ones(4), np.ones((2, 4)), 1.0)
        plan = RelocationPlan.from_instants(TimeHorizon.uniform(3), [1, 3])
        res = plan_degradation(f, plan)
        assert res.block_min.tolist() == [1, 1, 1] and res.total == 3

    def test_split_after_first(self):
        f = factorize([[1.0, 0.5, 1.0], [1.0, 1.0, 1.0]])
        plan = RelocationPlan.from_instants(TimeHorizon.uniform(2), [1])
        res = plan_degradation(f, plan)
        assert res.block_min.tolist() == [1.0, 0.5]
        assert res.total == 1.5 and res.proxy == 0.5

    def test_empty_plan(self, rng):
        f = factorize(rng.uniform(0.1, 1, (4, 5)))
        res = plan_degradation(f, RelocationPlan.empty(TimeHorizon.uniform(4)))
        assert res.block_min.tolist() == [f.min_degradation]
