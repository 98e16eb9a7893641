"""Dummy-length / stepwise-speed representation of travel times and the speed factorization.

A travel time ``tau(t)`` is generated by a constant length ``L`` traversed at a
piecewise-constant speed ``v(t)``: ``tau(t)`` is the time needed for the
integral of ``v`` from ``t`` onwards to reach ``L``.  `derive_igp` inverts that
map on the planning grid, `factorize` splits the per-period speeds into
arc, period and degradation factors, and `check_ranking_invariance` tests
whether arcs are ordered the same way in every period.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DomainError, IGPDerivationError
from .tdnet import PiecewiseLinearTT, TDNetwork, TimeHorizon, WorstTimeTable

ROUND_TRIP_TOL = 1e-9
# speeds below this (relative to the largest one) mean a vertical arrival plateau
_MIN_REL_SPEED = 1e-12


@dataclass(frozen=True)
class SpeedProfile:
    """Constant dummy length plus a stepwise speed.

    ``speeds[k]`` applies on ``[breaks[k], breaks[k + 1])``; the last speed
    extends indefinitely past the final break.
    """

    length: float
    breaks: tuple[float, ...]
    speeds: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "breaks", tuple(float(b) for b in self.breaks))
        object.__setattr__(self, "speeds", tuple(float(v) for v in self.speeds))
        if not self.length > 0:
            raise DomainError(f"dummy length must be positive, got {self.length}")
        if len(self.breaks) != len(self.speeds) or not self.breaks:
            raise DomainError("need one speed per break")
        if any(b <= a for a, b in zip(self.breaks, self.breaks[1:])):
            raise DomainError("speed breaks must be strictly increasing")
        if any(not v > 0 for v in self.speeds):
            raise DomainError("speeds must be strictly positive")

    def distance(self, a: float, b: float) -> float:
        """Integral of the speed over ``[a, b]``."""
        if b <= a:
            return 0.0
        total = 0.0
        k = max(bisect.bisect_right(self.breaks, a) - 1, 0)
        t = a
        while t < b:
            end = self.breaks[k + 1] if k + 1 < len(self.breaks) else math.inf
            seg_end = min(end, b)
            total += self.speeds[k] * (seg_end - t)
            t = seg_end
            k += 1
        return total

    def period_speeds(self, horizon: TimeHorizon, periods: Sequence[int] | None = None) -> np.ndarray:
        """Average speed over each requested grid period.

        For profiles returned by `derive_igp` the breaks are grid instants, so
        the averages are the piece speeds themselves.
        """
        pts = horizon.instants
        if periods is None:
            periods = range(horizon.n_periods)
        out = []
        for l in periods:
            a, b = pts[l], pts[l + 1]
            if a < self.breaks[0]:
                raise DomainError(f"period {l} starts before the profile")
            out.append(self.distance(a, b) / (b - a))
        return np.array(out)


def igp_traverse(profile: SpeedProfile, horizon: TimeHorizon, depart: float) -> float:
    """Travel time when leaving at ``depart``: consume ``length`` at the stepwise speed."""
    if not horizon.start <= depart <= horizon.end:
        raise DomainError(f"departure {depart} outside [{horizon.start}, {horizon.end}]")
    if depart < profile.breaks[0]:
        raise DomainError(f"departure {depart} precedes the speed profile start {profile.breaks[0]}")
    breaks, speeds = profile.breaks, profile.speeds
    k = bisect.bisect_right(breaks, depart) - 1
    remaining = profile.length
    t = depart
    while True:
        v = speeds[k]
        end = breaks[k + 1] if k + 1 < len(breaks) else math.inf
        cap = v * (end - t)
        if cap >= remaining:
            return (t - depart) + remaining / v
        remaining -= cap
        t = end
        k += 1


def traverse_grid(lengths, speeds, instants, departs: Sequence[int] | None = None) -> np.ndarray:
    """Vectorised traversal for many arcs sharing one period grid.

    Parameters
    ----------
    lengths : (n,) dummy lengths
    speeds : (n, P) speed per grid period; the last column extends past ``instants[-1]``
    instants : (P + 1,) grid instants
    departs : indices into ``instants`` to depart from (default: all)

    Returns
    -------
    (n, len(departs)) travel times
    """
    lengths = np.asarray(lengths, dtype=float)
    speeds = np.asarray(speeds, dtype=float)
    instants = np.asarray(instants, dtype=float)
    P = speeds.shape[1]
    if departs is None:
        departs = range(P + 1)
    departs = list(departs)
    out = np.empty((lengths.shape[0], len(departs)))
    for col, k in enumerate(departs):
        remaining = lengths.copy()
        tau = np.full(lengths.shape, np.nan)
        elapsed = 0.0
        l = min(k, P - 1)
        t = instants[k]
        pending = np.ones(lengths.shape, dtype=bool)
        while True:
            v = speeds[:, l]
            span = instants[l + 1] - t if l < P - 1 else math.inf
            if math.isinf(span):
                tau[pending] = elapsed + remaining[pending] / v[pending]
                break
            cap = v * span
            fin = pending & (cap >= remaining)
            tau[fin] = elapsed + remaining[fin] / v[fin]
            pending &= ~fin
            if not pending.any():
                break
            remaining = remaining - cap
            elapsed += span
            t = instants[l + 1]
            l += 1
        out[:, col] = tau
    return out


def _solve_grid_speeds(taus: np.ndarray, instants: np.ndarray, first: int):
    """Reverse substitution for grid-aligned speeds with ``L = 1``.

    ``taus`` holds travel times at every instant (n, P + 1).  Returns the
    per-period speeds for periods ``first .. P-1`` and the speed of the
    extension piece that starts at the horizon end.  Departure row ``k``
    involves only speeds of periods ``>= k``, so solving from the last row
    backwards leaves one unknown per row.
    """
    n, npts = taus.shape
    P = npts - 1
    h = np.diff(instants)
    v = np.zeros((n, P))
    suffix = np.zeros((n, P + 1))  # suffix[:, l] = distance covered on [t_l, T]
    ext = 1.0 / taus[:, P]
    arrive = instants[None, :] + taus
    for k in range(P - 1, first - 1, -1):
        A = arrive[:, k]
        beyond = np.maximum(A - instants[P], 0.0)
        if k == P - 1:
            later = ext * beyond
            inside = np.minimum(taus[:, k], h[k])
        else:
            inside = np.minimum(taus[:, k], h[k])
            m = np.clip(np.searchsorted(instants, A, side="right") - 1, k + 1, P - 1)
            rows = np.arange(n)
            # distance on [t_{k+1}, min(A, T)] using already known speeds, plus the tail past T
            upto = np.minimum(A, instants[P])
            later = np.where(
                A > instants[k + 1],
                suffix[:, k + 1] - suffix[rows, m] + v[rows, m] * (upto - instants[m]) + ext * beyond,
                0.0,
            )
        v[:, k] = (1.0 - later) / inside
        suffix[:, k] = suffix[:, k + 1] + v[:, k] * h[k]
    return v[:, first:], ext


def derive_speed_matrix(taus, horizon: TimeHorizon, reference: tuple[int, int] | None = None,
                        check: bool = True):
    """Batch version of `derive_igp` over arcs.

    Parameters
    ----------
    taus : (n, M + 2) travel times of n arcs at every grid instant
    reference : ``(a, b)`` instant indices of the reference interval ``[t_a, t_b]``

    Returns
    -------
    lengths : (n,)
    speeds : (n, b - a) speed of each arc in each reference period, max 1 per arc
    tail : (n, M + 1 - b + 1) speeds after the reference (periods b..M, then beyond T)
    """
    taus = np.asarray(taus, dtype=float)
    instants = horizon.instants
    P = horizon.n_periods
    a, b = reference if reference is not None else (0, P)
    if not 0 <= a < b <= P:
        raise DomainError(f"invalid reference interval ({a}, {b})")
    if taus.ndim != 2 or taus.shape[1] != P + 1:
        raise DomainError(f"expected travel times at {P + 1} instants")
    if np.any(taus <= 0):
        raise DomainError("travel times must be strictly positive")
    v, ext = _solve_grid_speeds(taus, instants, a)
    full = np.concatenate([v, ext[:, None]], axis=1)  # periods a..P-1, then beyond T
    scale = full[:, : b - a].max(axis=1)
    broken = ~np.isfinite(full) | (full <= _MIN_REL_SPEED * np.abs(full).max(axis=1, keepdims=True))
    if broken.any():
        bad = int(np.flatnonzero(broken.any(axis=1))[0])
        raise IGPDerivationError(
            f"arc {bad}: non-IGP-representable at tolerance (FIFO slope reaches -1)"
        )
    full = full / scale[:, None]
    lengths = 1.0 / scale
    if check:
        _verify_round_trip(lengths, full, instants, a, b, taus)
    return lengths, full[:, : b - a], full[:, b - a:]


def _verify_round_trip(lengths, full, instants, a, b, taus):
    # the piece past T acts as one more period; traverse_grid extends its last column
    pts = np.concatenate([instants[a:], [instants[-1] + 1.0]])
    got = traverse_grid(lengths, full, pts, range(0, b - a + 1))
    err = np.abs(got - taus[:, a:b + 1])
    worst = float(err.max()) if err.size else 0.0
    if worst > ROUND_TRIP_TOL * max(1.0, float(taus.max())):
        bad = int(np.argmax(err.max(axis=1)))
        raise IGPDerivationError(f"arc {bad}: round-trip error {worst:.3g} exceeds tolerance")


def derive_igp(fn: PiecewiseLinearTT, horizon: TimeHorizon,
               reference: tuple[int, int] | None = None) -> SpeedProfile:
    """Dummy length and grid-aligned stepwise speed reproducing ``fn`` at grid instants.

    ``reference`` gives instant indices ``(a, b)``; departures from every grid
    instant in ``[t_a, t_b]`` are reproduced to within 1e-9.  The speed has one
    piece per grid period from ``t_a`` on, plus a piece starting at the horizon
    end so that the last rows are matched exactly.  Speeds are scaled so the
    fastest reference period has speed 1.
    """
    idx = [horizon.instant_index(t) for t in fn.times]
    if any(k is None for k in idx):
        raise IGPDerivationError("breakpoints must lie on grid instants")
    taus = np.interp(horizon.instants, fn.times, fn.durations)[None, :]
    P = horizon.n_periods
    a, b = reference if reference is not None else (0, P)
    lengths, speeds, tail = derive_speed_matrix(taus, horizon, (a, b))
    breaks = tuple(horizon.instants[a:])
    return SpeedProfile(float(lengths[0]), breaks, tuple(speeds[0]) + tuple(tail[0]))


@dataclass(frozen=True)
class Factorization:
    """Speed split ``v[e, l] = max_speed[e] * congestion[l] * degradation[e, l]``.

    ``max_speed`` is each arc's top speed, ``congestion`` the network-wide
    slowdown per period and ``degradation`` (in (0, 1]) what is left over.
    """

    max_speed: np.ndarray
    congestion: np.ndarray
    degradation: np.ndarray
    min_degradation: float

    @property
    def period_minima(self) -> np.ndarray:
        """Smallest degradation over arcs, per period."""
        return self.degradation.min(axis=0)

    def reconstruct(self) -> np.ndarray:
        return self.max_speed[:, None] * self.congestion[None, :] * self.degradation


def factorize(speeds) -> Factorization:
    """Split an (arcs, periods) speed matrix into max speed, congestion and degradation."""
    v = np.asarray(speeds, dtype=float)
    if v.ndim != 2 or v.size == 0:
        raise DomainError("speeds must be a non-empty (arcs, periods) matrix")
    if np.any(~(v > 0)):
        raise DomainError("zero or negative speed in factorization")
    u = v.max(axis=1)
    ratio = v / u[:, None]
    b = ratio.max(axis=0)
    deg = ratio / b[None, :]
    return Factorization(u, b, deg, float(deg.min()))


def network_speeds(net: TDNetwork, reference: tuple[int, int] | None = None) -> np.ndarray:
    """Per-period speeds of every arc (flattened row-major), max 1 per arc."""
    _, speeds, _ = derive_speed_matrix(net.arc_rows(), net.horizon, reference)
    return speeds


def factorize_network(net: TDNetwork, reference: tuple[int, int] | None = None) -> Factorization:
    """Derive speeds on the reference interval (default: whole horizon) and factorize."""
    return factorize(network_speeds(net, reference))


class RankingCheck(NamedTuple):
    invariant: bool
    witness: tuple[int, int] | None = None
    periods: tuple[int, int] | None = None


def check_ranking_invariance(table, periods: Sequence[int] | None = None) -> RankingCheck:
    """Do all arcs keep the same worst-time order across the given periods?

    Arcs are sorted lexicographically by their worst-time vector; the set is a
    chain under componentwise ``<=`` iff every consecutive pair in that order
    is componentwise ordered.  On failure returns the crossing pair (flat arc
    indices) and two periods where their order differs.
    """
    rows = table.arc_rows() if isinstance(table, WorstTimeTable) else np.asarray(table, dtype=float)
    if rows.ndim != 2:
        raise DomainError("table must be (arcs, periods)")
    cols = list(range(rows.shape[1])) if periods is None else [int(p) for p in periods]
    if not cols:
        raise DomainError("need at least one period")
    X = rows[:, cols]
    if X.shape[0] < 2 or X.shape[1] < 2:
        return RankingCheck(True)
    order = np.lexsort(X.T[::-1])
    S = X[order]
    diff = S[1:] - S[:-1]
    bad = np.flatnonzero((diff < 0).any(axis=1))
    if bad.size == 0:
        return RankingCheck(True)
    r = int(bad[0])
    lower = int(np.flatnonzero(diff[r] > 0)[0])
    upper = int(np.flatnonzero(diff[r] < 0)[0])
    return RankingCheck(False, (int(order[r]), int(order[r + 1])), (cols[lower], cols[upper]))


class PlanDegradation(NamedTuple):
    block_min: np.ndarray
    proxy: float
    total: float


def plan_degradation(fact: Factorization, plan) -> PlanDegradation:
    """Minimum degradation inside each macro-period of ``plan``.

    ``proxy`` is the minimum over blocks, ``total`` their sum (the quantity
    the relocation selection maximizes).
    """
    m = np.array([float(fact.degradation[:, list(g)].min()) for g in plan.period_groups])
    return PlanDegradation(m, float(m.min()), float(m.sum()))
