"""Two-phase relocation heuristic, lower bound, quality metrics and a tiny exact oracle."""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BudgetExceededError, DomainError, InfeasibleParametersError
from .igp import factorize_network
from .pcenter import PCenterResult, allocate, radius, solve_pcenter
from .planner import (
    Certificate,
    RelocationPlan,
    build_gain_dag,
    certify_plan,
    select_relocations,
)
from .tdnet import TDNetwork, WorstTimeTable, build_worst_table

EXACT_BUDGET = 10**7


@dataclass
class MultiPeriodSolution:
    """One open-facility set and allocation per period.

    ``locations[l]`` is constant inside each macro-period of ``plan``;
    ``allocations[l][j]`` is the facility serving customer ``j`` in period l.
    """

    locations: list[tuple[int, ...]]
    allocations: list[np.ndarray]
    radii: list[float]
    objective: float
    relocations: int
    plan: RelocationPlan

    @property
    def seeds(self) -> list[tuple[int, ...]]:
        """The facility set chosen for each macro-period."""
        return [self.locations[a] for a, _ in self.plan.blocks]

    def to_dict(self, net: TDNetwork | None = None) -> dict:
        name = (lambda i: net.facilities[i]) if net is not None else (lambda i: i)
        return {
            "objective": self.objective,
            "relocations": self.relocations,
            "relocation_instants": list(self.plan.instants),
            "macro_periods": [
                {"start": s, "end": e, "facilities": [name(i) for i in O]}
                for (s, e), O in zip(self.plan.macro_periods, self.seeds)
            ],
            "period_radii": list(self.radii),
        }


@dataclass
class SolveReport:
    solution: MultiPeriodSolution
    p: int
    K: int
    lower_bound: float
    reference_r0: float
    gap: float
    gain: float
    certificate: Certificate | None
    phase1_s: float
    phase2_s: float
    total_s: float

    @property
    def objective(self) -> float:
        return self.solution.objective

    def to_dict(self, net: TDNetwork | None = None) -> dict:
        out = {
            "p": self.p,
            "K": self.K,
            "objective": self.objective,
            "lower_bound": self.lower_bound,
            "reference_r0": self.reference_r0,
            "gap": self.gap,
            "gain": self.gain,
            "phase1_s": self.phase1_s,
            "phase2_s": self.phase2_s,
            "total_s": self.total_s,
            "solution": self.solution.to_dict(net),
        }
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_dict()
        return out


def _check_params(net: TDNetwork, p: int, K: int | None = None) -> None:
    n_fac = len(net.facilities)
    if not 1 <= p <= n_fac:
        raise InfeasibleParametersError(f"p={p} must lie in [1, {n_fac}]")
    if K is not None and not 0 <= K <= net.horizon.M:
        raise InfeasibleParametersError(f"K={K} must lie in [0, {net.horizon.M}]")


def evaluate(table: WorstTimeTable, plan: RelocationPlan, seeds: Sequence[Sequence[int]]) -> MultiPeriodSolution:
    """Expand one seed set per macro-period into per-period allocations and radii."""
    if len(seeds) != len(plan.blocks):
        raise DomainError("need exactly one seed set per macro-period")
    locations: list[tuple[int, ...]] = []
    allocations: list[np.ndarray] = []
    radii: list[float] = []
    for (a, b), O in zip(plan.blocks, seeds):
        O = tuple(sorted(int(i) for i in O))
        for l in range(a, b):
            d = table.period(l)
            S = allocate(O, d)
            locations.append(O)
            allocations.append(S)
            radii.append(radius(O, S, d))
    moves = sum(1 for l in range(1, len(locations)) if locations[l] != locations[l - 1])
    return MultiPeriodSolution(locations, allocations, radii, math.fsum(radii), moves, plan)


def phase_one(net: TDNetwork, K: int) -> RelocationPlan:
    """Relocation instants; skipped when K = 0 or K = M (single possible plan)."""
    if K == 0:
        return RelocationPlan.empty(net.horizon)
    if K == net.horizon.M:
        return RelocationPlan.full(net.horizon)
    dag = build_gain_dag(factorize_network(net), net.horizon)
    plan, _ = select_relocations(dag, K)
    return plan


def phase_two(table: WorstTimeTable, plan: RelocationPlan, p: int) -> list[PCenterResult]:
    """Optimal p-center on the worst times of every macro-period."""
    out: list[PCenterResult] = []
    hint = None
    for a, b in plan.blocks:
        res = solve_pcenter(table.block(a, b), p, hint=hint)
        out.append(res)
        hint = res.radius
    return out


def period_optima(net: TDNetwork, p: int, table: WorstTimeTable | None = None) -> list[PCenterResult]:
    """Optimal single-period p-center of every period."""
    _check_params(net, p)
    table = table if table is not None else build_worst_table(net)
    return phase_two(table, RelocationPlan.full(net.horizon), p)


def lower_bound(net: TDNetwork, p: int, table: WorstTimeTable | None = None) -> float:
    """Optimum with a relocation allowed at every instant: sum of per-period optima."""
    return math.fsum(r.radius for r in period_optima(net, p, table))


def metrics(r_heur: float, lb: float, reference_r0: float) -> dict[str, float]:
    """Relative gap to the lower bound and normalised gain over the no-relocation value."""
    if not lb > 0:
        raise DomainError(f"lower bound must be positive, got {lb}")
    gap = (r_heur - lb) / lb
    span = reference_r0 - lb
    gain = 1.0 if span == 0 else (reference_r0 - r_heur) / span
    return {"gap": gap, "gain": gain}


def solve(
    net: TDNetwork,
    p: int,
    K: int,
    *,
    certify: bool = False,
    lower_bound_value: float | None = None,
    reference_r0: float | None = None,
    table: WorstTimeTable | None = None,
) -> SolveReport:
    """Run both phases and score the result.

    ``lower_bound_value`` and ``reference_r0`` (the K = 0 heuristic objective)
    may be passed in when solving the same instance for several K.
    """
    _check_params(net, p, K)
    table = table if table is not None else build_worst_table(net)

    t0 = time.perf_counter()
    plan = phase_one(net, K)
    t1 = time.perf_counter()
    seeds = phase_two(table, plan, p)
    solution = evaluate(table, plan, [s.facilities for s in seeds])
    t2 = time.perf_counter()

    if lower_bound_value is None:
        lower_bound_value = lower_bound(net, p, table)
    if reference_r0 is None:
        if K == 0:
            reference_r0 = solution.objective
        else:
            empty = RelocationPlan.empty(net.horizon)
            r0_seed = phase_two(table, empty, p)
            reference_r0 = evaluate(table, empty, [s.facilities for s in r0_seed]).objective
    m = metrics(solution.objective, lower_bound_value, reference_r0)
    cert = certify_plan(net, plan, table) if certify else None
    return SolveReport(
        solution=solution,
        p=p,
        K=K,
        lower_bound=lower_bound_value,
        reference_r0=reference_r0,
        gap=m["gap"],
        gain=m["gain"],
        certificate=cert,
        phase1_s=t1 - t0,
        phase2_s=t2 - t1,
        total_s=t2 - t0,
    )


@dataclass
class ExactResult:
    value: float
    solution: MultiPeriodSolution


def exact_small(net: TDNetwork, p: int, K: int, budget: int = EXACT_BUDGET) -> ExactResult:
    """Optimal value with at most K relocations, by exhaustive enumeration.

    Every plan with exactly K instants is tried (a solution with fewer moves is
    one of them with repeated sets); inside a macro-period every p-subset is
    tried, each period being served by closest-facility allocation.
    """
    _check_params(net, p, K)
    M = net.horizon.M
    n_fac = len(net.facilities)
    n_sets = math.comb(n_fac, p)
    work = math.comb(M, K) * n_sets ** (K + 1)
    if work > budget:
        raise BudgetExceededError(f"exhaustive search needs {work} evaluations, budget {budget}")
    table = build_worst_table(net)
    combos = np.array(list(itertools.combinations(range(n_fac), p)))
    # rad[s, l]: radius of facility set s in period l
    rad = table.values[combos].min(axis=1).max(axis=1)
    P = M + 1
    block_best: dict[tuple[int, int], tuple[float, int]] = {}
    for a in range(P):
        for b in range(a + 1, P + 1):
            costs = [math.fsum(rad[s, a:b]) for s in range(len(combos))]
            s = int(np.argmin(costs))
            block_best[(a, b)] = (costs[s], s)
    best_value = math.inf
    best_plan: RelocationPlan | None = None
    for inner in itertools.combinations(range(1, M + 1), K):
        nodes = (0, *inner, M + 1)
        value = math.fsum(block_best[(a, b)][0] for a, b in zip(nodes, nodes[1:]))
        if value < best_value:
            best_value = value
            best_plan = RelocationPlan(net.horizon, nodes)
    seeds = [tuple(combos[block_best[blk][1]]) for blk in best_plan.blocks]
    solution = evaluate(table, best_plan, seeds)
    return ExactResult(solution.objective, solution)
