import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mpcptd.errors import BudgetExceededError, DomainError, InfeasibleParametersError
from mpcptd.pcenter import allocate, brute_force_pcenter, radius, solve_pcenter
from mpcptd.planner import RelocationPlan
from mpcptd.solver import evaluate, exact_small, lower_bound, metrics, period_optima, solve
from mpcptd.tdnet import TDNetwork, TimeHorizon, build_worst_table

from conftest import integer_network, speed_network


class TestMetrics:
    def test_gap(self):
        assert metrics(105, 100, 120)["gap"] == pytest.approx(0.05)

    def test_gain(self):
        assert metrics(110, 100, 120)["gain"] == pytest.approx(0.5)

    def test_boundary(self):
        assert metrics(100, 100, 100) == {"gap": 0.0, "gain": 1.0}
        assert metrics(100, 100, 130) == {"gap": 0.0, "gain": 1.0}

    def test_bad_lb(self):
        with pytest.raises(DomainError):
            metrics(1, 0, 1)


class TestLowerBound:
    def test_time_invariant(self, rng):
        d = rng.uniform(1, 20, (6, 6))
        h = TimeHorizon.uniform(4)
        net = TDNetwork(range(6), range(6), h, np.repeat(d[:, :, None], 6, axis=2))
        assert lower_bound(net, 2) == pytest.approx(5 * solve_pcenter(d, 2).radius)

    def test_single_period(self, rng):
        d = rng.uniform(1, 20, (5, 5))
        net = TDNetwork(range(5), range(5), TimeHorizon(0, 60), np.stack([d, d + 1], axis=2))
        assert lower_bound(net, 2) == solve_pcenter(d + 1, 2).radius

    def test_matches_brute_force(self, rng):
        net = speed_network(rng, 6, 6, 3)
        table = build_worst_table(net)
        expect = math.fsum(brute_force_pcenter(table.period(l), 2).radius for l in range(4))
        assert lower_bound(net, 2) == expect
        assert [r.radius for r in period_optima(net, 2)] == [
            brute_force_pcenter(table.period(l), 2).radius for l in range(4)
        ]


class TestSolve:
    def test_k_equals_m(self, rng):
        net = speed_network(rng, 8, 8, 6)
        rep = solve(net, 3, 6)
        assert rep.objective == rep.lower_bound
        assert rep.gap == 0.0 and rep.gain == 1.0
        assert rep.phase1_s >= 0 and rep.total_s >= rep.phase2_s

    def test_common_pattern_k0(self, rng):
        net = speed_network(rng, 7, 7, 5, common=True)
        rep = solve(net, 2, 0, certify=True)
        assert abs(rep.gap) <= 1e-12
        assert rep.certificate.optimal

    def test_bad_params(self, rng):
        net = speed_network(rng, 3, 3, 2)
        with pytest.raises(InfeasibleParametersError):
            solve(net, 0, 1)
        with pytest.raises(InfeasibleParametersError):
            solve(net, 1, 3)

    def test_to_dict(self, rng):
        net = speed_network(rng, 4, 4, 3)
        d = solve(net, 2, 1, certify=True).to_dict(net)
        assert set(d) >= {"p", "K", "gap", "gain", "phase1_s", "phase2_s", "total_s", "solution", "certificate"}
        assert len(d["solution"]["macro_periods"]) == 2

    def test_evaluate_requires_one_seed_per_block(self, rng):
        net = speed_network(rng, 3, 3, 2)
        plan = RelocationPlan.from_instants(net.horizon, [1])
        with pytest.raises(DomainError):
            evaluate(build_worst_table(net), plan, [(0,)])

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), M=st.integers(1, 8), K=st.integers(0, 8), p=st.integers(1, 4))
    def test_solution_invariants(self, seed, M, K, p):
        K = min(K, M)
        rng = np.random.default_rng(seed)
        net = speed_network(rng, 6, 6, M)
        table = build_worst_table(net)
        rep = solve(net, p, K, certify=True)
        sol = rep.solution
        assert sol.relocations <= K
        assert rep.gap >= -1e-15
        for a, b in sol.plan.blocks:
            assert len({sol.locations[l] for l in range(a, b)}) == 1
        for l in range(net.horizon.n_periods):
            d = table.period(l)
            assert np.array_equal(sol.allocations[l], allocate(sol.locations[l], d))
            assert sol.radii[l] == radius(sol.locations[l], sol.allocations[l], d)
        assert sol.objective == math.fsum(sol.radii)
        if rep.certificate.optimal:
            assert rep.gap == pytest.approx(0.0, abs=1e-12)


class TestExact:
    def test_budget(self, rng):
        net = speed_network(rng, 10, 10, 8)
        with pytest.raises(BudgetExceededError):
            exact_small(net, 5, 3)

    def test_k_equals_m(self, rng):
        net = integer_network(rng, 5, 3)
        assert exact_small(net, 2, 3).value == lower_bound(net, 2)

    def test_sandwich_and_chain(self, rng):
        for _ in range(10):
            net = integer_network(rng, 6, 4)
            lb = lower_bound(net, 2)
            prev = math.inf
            for K in range(0, 5):
                ex = exact_small(net, 2, K)
                rep = solve(net, 2, K)
                assert lb <= ex.value <= rep.objective
                assert ex.value <= prev
                assert ex.solution.relocations <= K
                prev = ex.value

    def test_invariant_k0_matches_heuristic(self, rng):
        for _ in range(5):
            net = speed_network(rng, 5, 5, 3, common=True)
            assert exact_small(net, 2, 0).value == pytest.approx(solve(net, 2, 0).objective, rel=1e-12)


class TestInvariantInstances:
    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_same_allocation_every_period(self, seed):
        rng = np.random.default_rng(seed)
        net = speed_network(rng, 6, 6, 5, common=True)
        table = build_worst_table(net)
        for _ in range(5):
            O = tuple(sorted(rng.choice(6, 2, replace=False)))
            maps = [allocate(O, table.period(l)).tolist() for l in range(table.n_periods)]
            assert all(m == maps[0] for m in maps)

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_first_period_set_optimal_everywhere(self, seed):
        rng = np.random.default_rng(seed)
        net = speed_network(rng, 6, 6, 5, common=True)
        table = build_worst_table(net)
        O = solve_pcenter(table.period(0), 2).facilities
        for l in range(table.n_periods):
            d = table.period(l)
            assert radius(O, allocate(O, d), d) == solve_pcenter(d, 2).radius
