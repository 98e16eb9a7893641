"""Selection of relocation instants (Phase I).

Nodes ``0 .. M+1`` of the gain DAG stand for the instants ``t_0 .. t_{M+1}``;
an arc ``(h, l)`` is the macro-period made of periods ``h .. l-1`` and its
gain is the smallest degradation coefficient of any arc of the network in any
of those periods.  A plan with K relocations is a source-to-sink path with
exactly K + 1 arcs, and the best one is found by dynamic programming.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BudgetExceededError, DomainError, InfeasibleParametersError
from .igp import Factorization, RankingCheck, check_ranking_invariance, derive_speed_matrix, factorize
from .tdnet import TDNetwork, TimeHorizon, build_worst_table

BRUTE_FORCE_BUDGET = 10**6
TIE_TOL = 1e-12


@dataclass(frozen=True)
class RelocationPlan:
    """Relocation instants given as DAG nodes ``0 = n_0 < n_1 < ... < n_{K+1} = M+1``."""

    horizon: TimeHorizon
    nodes: tuple[int, ...]

    def __post_init__(self):
        nodes = tuple(int(x) for x in self.nodes)
        object.__setattr__(self, "nodes", nodes)
        last = self.horizon.M + 1
        if len(nodes) < 2 or nodes[0] != 0 or nodes[-1] != last:
            raise DomainError(f"plan must start at node 0 and end at node {last}")
        if any(b <= a for a, b in zip(nodes, nodes[1:])):
            raise DomainError("plan nodes must be strictly increasing")

    @classmethod
    def from_instants(cls, horizon: TimeHorizon, indices: Sequence[int]) -> "RelocationPlan":
        """Build from 1-based grid indices of the relocation instants."""
        return cls(horizon, (0, *sorted(int(k) for k in indices), horizon.M + 1))

    @classmethod
    def empty(cls, horizon: TimeHorizon) -> "RelocationPlan":
        return cls(horizon, (0, horizon.M + 1))

    @classmethod
    def full(cls, horizon: TimeHorizon) -> "RelocationPlan":
        return cls(horizon, tuple(range(horizon.M + 2)))

    @property
    def K(self) -> int:
        return len(self.nodes) - 2

    @property
    def instant_indices(self) -> tuple[int, ...]:
        return self.nodes[1:-1]

    @property
    def instants(self) -> tuple[float, ...]:
        pts = self.horizon.instants
        return tuple(float(pts[k]) for k in self.instant_indices)

    @property
    def macro_periods(self) -> list[tuple[float, float]]:
        pts = self.horizon.instants
        return [(float(pts[a]), float(pts[b])) for a, b in zip(self.nodes, self.nodes[1:])]

    @property
    def blocks(self) -> list[tuple[int, int]]:
        """``(first period, one past last period)`` of every macro-period."""
        return list(zip(self.nodes, self.nodes[1:]))

    @property
    def period_groups(self) -> list[range]:
        return [range(a, b) for a, b in self.blocks]


@dataclass(frozen=True)
class GainDAG:
    """Gain ``c[h, l]`` for ``0 <= h < l <= M+1``; other entries are NaN."""

    gains: np.ndarray
    horizon: TimeHorizon | None = None

    @property
    def n_nodes(self) -> int:
        return self.gains.shape[0]

    @property
    def M(self) -> int:
        return self.n_nodes - 2

    def path_value(self, nodes: Sequence[int]) -> float:
        return math.fsum(float(self.gains[a, b]) for a, b in zip(nodes, nodes[1:]))

    @classmethod
    def from_period_minima(cls, minima, horizon: TimeHorizon | None = None) -> "GainDAG":
        """Gains for a sequence of per-period minima (one per period)."""
        m = np.asarray(minima, dtype=float)
        n = m.shape[0] + 1
        c = np.full((n, n), np.nan)
        for h in range(n - 1):
            c[h, h + 1:] = np.minimum.accumulate(m[h:])
        return cls(c, horizon)


def build_gain_dag(fact: Factorization, horizon: TimeHorizon | None = None) -> GainDAG:
    """Gain of every macro-period: the least degradation inside it."""
    return GainDAG.from_period_minima(fact.period_minima, horizon)


def _horizon_of(dag: GainDAG) -> TimeHorizon:
    return dag.horizon if dag.horizon is not None else TimeHorizon.uniform(dag.M)


def select_relocations(dag: GainDAG, K: int) -> tuple[RelocationPlan, float]:
    """Best source-to-sink path with exactly K + 1 arcs.

    ``best[k][h]`` is the largest gain collectable from node ``h`` to the sink
    with ``k`` arcs.  The path is rebuilt forwards taking the smallest feasible
    successor among (near-)ties, which yields the lexicographically earliest
    optimal set of instants.  Returns the plan and its value.
    """
    M = dag.M
    if K < 0 or K > M:
        raise InfeasibleParametersError(f"K={K} must lie in [0, {M}]")
    c = np.where(np.isnan(dag.gains), -np.inf, dag.gains)  # missing arcs are unusable
    sink = M + 1
    n = M + 2
    best = np.full((K + 2, n), -np.inf)
    best[0, sink] = 0.0
    for k in range(1, K + 2):
        for h in range(sink - 1, -1, -1):
            # the remaining k - 1 arcs need k - 1 distinct interior nodes after the next one
            lo, hi = h + 1, sink - (k - 1)
            if lo > hi:
                continue
            cand = c[h, lo:hi + 1] + best[k - 1, lo:hi + 1]
            best[k, h] = np.max(cand)
    nodes = [0]
    h = 0
    for k in range(K + 1, 0, -1):
        target = best[k, h]
        lo, hi = h + 1, sink - (k - 1)
        for l in range(lo, hi + 1):
            if c[h, l] + best[k - 1, l] >= target - TIE_TOL:
                nodes.append(l)
                h = l
                break
    nodes_t = tuple(nodes)
    return RelocationPlan(_horizon_of(dag), nodes_t), dag.path_value(nodes_t)


def brute_force_selection(dag: GainDAG, K: int, budget: int = BRUTE_FORCE_BUDGET):
    """Enumerate every K-subset of interior nodes (test oracle)."""
    M = dag.M
    if K < 0 or K > M:
        raise InfeasibleParametersError(f"K={K} must lie in [0, {M}]")
    if math.comb(M, K) > budget:
        raise BudgetExceededError(f"C({M},{K}) plans exceed budget {budget}")
    best_v = -math.inf
    best_nodes: tuple[int, ...] = ()
    for combo in itertools.combinations(range(1, M + 1), K):
        nodes = (0, *combo, M + 1)
        v = dag.path_value(nodes)
        if v > best_v + TIE_TOL:
            best_v, best_nodes = v, nodes
    return RelocationPlan(_horizon_of(dag), best_nodes), best_v


@dataclass
class Certificate:
    """Optimality evidence for a plan.

    ``optimal`` is True when the arc ranking is invariant inside every
    macro-period, which makes the decomposition solution optimal.
    """

    min_degradation: float
    block_min_degradation: list[float]
    block_invariance: list[RankingCheck]
    optimal: bool
    witnesses: list[tuple] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "min_degradation": self.min_degradation,
            "block_min_degradation": list(self.block_min_degradation),
            "block_invariant": [r.invariant for r in self.block_invariance],
            "optimal": self.optimal,
            "witnesses": [list(map(str, w)) for w in self.witnesses],
        }


def certify_plan(net: TDNetwork, plan: RelocationPlan, table=None) -> Certificate:
    """Re-derive speeds and degradations per macro-period and check ranking invariance."""
    table = table if table is not None else build_worst_table(net)
    rows = net.arc_rows()
    block_min: list[float] = []
    checks: list[RankingCheck] = []
    witnesses: list[tuple] = []
    for a, b in plan.blocks:
        _, speeds, _ = derive_speed_matrix(rows, net.horizon, (a, b))
        block_min.append(factorize(speeds).min_degradation)
        chk = check_ranking_invariance(table, range(a, b))
        checks.append(chk)
        if not chk.invariant:
            e1, e2 = chk.witness
            witnesses.append((net.arc_label(e1), net.arc_label(e2), chk.periods))
    return Certificate(
        min_degradation=float(min(block_min)),
        block_min_degradation=block_min,
        block_invariance=checks,
        optimal=all(c.invariant for c in checks),
        witnesses=witnesses,
    )
