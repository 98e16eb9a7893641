"""Time-dependent service network, planning grid and worst-case service times.

Travel-time functions are continuous, piecewise linear and FIFO, with every
breakpoint on a grid instant.  Because of that alignment a function is fully
described by its values at the grid instants, which is how `TDNetwork` stores
them: one dense ``(|F|, |C|, M + 2)`` array.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .errors import (
    AlignmentError,
    CompletenessError,
    DomainError,
    FIFOError,
    MalformedFunctionError,
    ValidationError,
)

FIFO_TOL = 1e-9
ALIGN_TOL = 1e-9


@dataclass(frozen=True)
class TimeHorizon:
    """Planning horizon ``[start, end]`` with M candidate relocation instants.

    The instants ``start, grid..., end`` split the horizon into M + 1 closed
    periods; period ``l`` is ``[instants[l], instants[l + 1]]``.
    """

    start: float = 0.0
    end: float = 1440.0
    grid: tuple[float, ...] = ()

    def __post_init__(self):
        grid = tuple(float(t) for t in self.grid)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "start", float(self.start))
        object.__setattr__(self, "end", float(self.end))
        if not self.start < self.end:
            raise DomainError(f"horizon start {self.start} must precede end {self.end}")
        pts = (self.start,) + grid + (self.end,)
        for a, b in zip(pts, pts[1:]):
            if not a < b:
                raise DomainError(
                    f"grid instants must be strictly increasing inside ({self.start}, {self.end})"
                )

    @classmethod
    def uniform(cls, M: int, end: float = 1440.0, start: float = 0.0) -> "TimeHorizon":
        """M equally spaced instants strictly inside ``(start, end)``."""
        if M < 0:
            raise DomainError("M must be non-negative")
        step = (end - start) / (M + 1)
        return cls(start, end, tuple(start + step * k for k in range(1, M + 1)))

    @property
    def M(self) -> int:
        return len(self.grid)

    @property
    def n_periods(self) -> int:
        return len(self.grid) + 1

    @property
    def instants(self) -> np.ndarray:
        """``t_0, ..., t_{M+1}`` as an array."""
        return np.array((self.start,) + self.grid + (self.end,))

    @property
    def periods(self) -> list[tuple[float, float]]:
        pts = self.instants
        return [(float(pts[k]), float(pts[k + 1])) for k in range(self.n_periods)]

    def instant_index(self, t: float, tol: float = ALIGN_TOL) -> int | None:
        """Index of the instant equal to ``t`` (within ``tol``), else None."""
        pts = self.instants
        k = int(np.searchsorted(pts, t))
        for cand in (k - 1, k):
            if 0 <= cand < len(pts) and abs(pts[cand] - t) <= tol:
                return cand
        return None


@dataclass(frozen=True)
class PiecewiseLinearTT:
    """Continuous piecewise-linear travel time ``tau(t)`` given by breakpoints."""

    times: tuple[float, ...]
    durations: tuple[float, ...]

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        durs = tuple(float(d) for d in self.durations)
        if len(times) < 1 or len(times) != len(durs):
            raise MalformedFunctionError("need at least one (time, duration) breakpoint")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise MalformedFunctionError("breakpoint times must be strictly increasing")
        if not all(np.isfinite(times)) or not all(np.isfinite(durs)):
            raise MalformedFunctionError("breakpoints must be finite")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "durations", durs)

    @classmethod
    def from_pairs(cls, pairs: Sequence[Sequence[float]]) -> "PiecewiseLinearTT":
        if len(pairs) == 0:
            raise MalformedFunctionError("need at least one (time, duration) breakpoint")
        return cls(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))

    @classmethod
    def constant(cls, value: float, start: float = 0.0, end: float = 1440.0) -> "PiecewiseLinearTT":
        return cls((start, end), (value, value))

    @property
    def pairs(self) -> list[tuple[float, float]]:
        return list(zip(self.times, self.durations))

    @property
    def slopes(self) -> np.ndarray:
        t = np.asarray(self.times)
        d = np.asarray(self.durations)
        return np.diff(d) / np.diff(t)

    def __call__(self, t: float) -> float:
        return evaluate_tt(self, t)


class FifoCheck(NamedTuple):
    ok: bool
    segment: int | None = None


def evaluate_tt(fn: PiecewiseLinearTT, t: float) -> float:
    """Linear interpolation of ``fn`` at departure time ``t``."""
    if not fn.times[0] <= t <= fn.times[-1]:
        raise DomainError(f"t={t} outside [{fn.times[0]}, {fn.times[-1]}]")
    return float(np.interp(t, fn.times, fn.durations))


def check_fifo(fn: PiecewiseLinearTT, tol: float = FIFO_TOL) -> FifoCheck:
    """FIFO holds iff every segment slope is at least -1 (minus ``tol``)."""
    if len(fn.times) < 1:
        raise MalformedFunctionError("empty travel-time function")
    bad = np.flatnonzero(fn.slopes < -1.0 - tol)
    if bad.size:
        return FifoCheck(False, int(bad[0]))
    return FifoCheck(True, None)


def worst_service_time(fn: PiecewiseLinearTT, a: float, b: float) -> float:
    """Exact maximum of ``fn`` over the closed interval ``[a, b]``."""
    if a > b:
        raise DomainError(f"empty interval [{a}, {b}]")
    lo, hi = fn.times[0], fn.times[-1]
    if a < lo or b > hi:
        raise DomainError(f"interval [{a}, {b}] outside [{lo}, {hi}]")
    best = max(evaluate_tt(fn, a), evaluate_tt(fn, b))
    for t, d in zip(fn.times, fn.durations):
        if a < t < b and d > best:
            best = d
    return best


class TDNetwork:
    """Complete bipartite network F x C with grid-aligned travel-time functions.

    Parameters
    ----------
    facilities, customers : sequences of hashable ids
    horizon : TimeHorizon
    tt : array of shape (|F|, |C|, M + 2)
        Travel time of every arc at every instant ``t_0 .. t_{M+1}``.
    """

    def __init__(self, facilities, customers, horizon: TimeHorizon, tt, name: str = "", seed=None):
        self.facilities = tuple(facilities)
        self.customers = tuple(customers)
        self.horizon = horizon
        self.name = name
        self.seed = seed
        tt = np.array(tt, dtype=float)
        expected = (len(self.facilities), len(self.customers), horizon.M + 2)
        if tt.shape != expected:
            raise ValidationError(f"travel-time array has shape {tt.shape}, expected {expected}")
        if len(set(self.facilities)) != len(self.facilities):
            raise ValidationError("duplicate facility id")
        if len(set(self.customers)) != len(self.customers):
            raise ValidationError("duplicate customer id")
        if not np.all(np.isfinite(tt)) or np.any(tt <= 0):
            i, j, k = np.argwhere(~(np.isfinite(tt) & (tt > 0)))[0]
            raise ValidationError(
                f"arc ({self.facilities[i]}, {self.customers[j]}) has non-positive travel time "
                f"at t={horizon.instants[k]}"
            )
        slopes = np.diff(tt, axis=2) / np.diff(horizon.instants)
        if np.any(slopes < -1.0 - FIFO_TOL):
            i, j, k = np.argwhere(slopes < -1.0 - FIFO_TOL)[0]
            raise FIFOError(
                f"arc ({self.facilities[i]}, {self.customers[j]}) violates FIFO on segment {k} "
                f"(slope {slopes[i, j, k]:.6g})"
            )
        tt.setflags(write=False)
        self.tt = tt

    @classmethod
    def from_arcs(
        cls,
        facilities,
        customers,
        arcs: Mapping[tuple, PiecewiseLinearTT],
        horizon: TimeHorizon,
        name: str = "",
        seed=None,
    ) -> "TDNetwork":
        """Build from one `PiecewiseLinearTT` per ``(facility, customer)`` pair."""
        facilities, customers = tuple(facilities), tuple(customers)
        fidx = {f: a for a, f in enumerate(facilities)}
        cidx = {c: b for b, c in enumerate(customers)}
        for key in arcs:
            if key[0] not in fidx or key[1] not in cidx:
                raise CompletenessError(f"arc ({key[0]}, {key[1]}) references an unknown node")
        instants = horizon.instants
        tt = np.empty((len(facilities), len(customers), len(instants)))
        for f, a in fidx.items():
            for c, b in cidx.items():
                fn = arcs.get((f, c))
                if fn is None:
                    raise CompletenessError(f"missing arc ({f}, {c})")
                _check_alignment(fn, horizon, f"({f}, {c})")
                tt[a, b] = np.interp(instants, fn.times, fn.durations)
        return cls(facilities, customers, horizon, tt, name=name, seed=seed)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.facilities), len(self.customers)

    def arc(self, i: int, j: int) -> PiecewiseLinearTT:
        """Travel-time function of arc ``(facilities[i], customers[j])``."""
        return PiecewiseLinearTT(tuple(self.horizon.instants), tuple(self.tt[i, j]))

    def arc_rows(self) -> np.ndarray:
        """Instant values flattened to one row per arc, shape (|F||C|, M + 2)."""
        return self.tt.reshape(-1, self.tt.shape[2])

    def arc_label(self, flat: int) -> tuple:
        i, j = divmod(int(flat), len(self.customers))
        return self.facilities[i], self.customers[j]

    def __eq__(self, other):
        if not isinstance(other, TDNetwork):
            return NotImplemented
        return (
            self.facilities == other.facilities
            and self.customers == other.customers
            and self.horizon == other.horizon
            and np.array_equal(self.tt, other.tt)
        )

    def __repr__(self):
        return (
            f"TDNetwork(name={self.name!r}, |F|={len(self.facilities)}, "
            f"|C|={len(self.customers)}, M={self.horizon.M})"
        )


def _check_alignment(fn: PiecewiseLinearTT, horizon: TimeHorizon, label) -> None:
    for t in fn.times:
        if horizon.instant_index(t) is None:
            raise AlignmentError(f"arc {label}: breakpoint t={t} is not a grid instant")
    if abs(fn.times[0] - horizon.start) > ALIGN_TOL or abs(fn.times[-1] - horizon.end) > ALIGN_TOL:
        raise AlignmentError(
            f"arc {label}: breakpoints span [{fn.times[0]}, {fn.times[-1]}], "
            f"horizon is [{horizon.start}, {horizon.end}]"
        )
    fifo = check_fifo(fn)
    if not fifo.ok:
        raise FIFOError(f"arc {label}: FIFO violated on segment {fifo.segment}")


class WorstTimeTable:
    """Per-period worst service times ``d_ij(I_l)``, shape (|F|, |C|, M + 1)."""

    def __init__(self, values: np.ndarray, horizon: TimeHorizon | None = None):
        values = np.asarray(values, dtype=float)
        if values.ndim != 3:
            raise DomainError("worst-time table must be indexed by (facility, customer, period)")
        self.values = values
        self.horizon = horizon

    @property
    def n_periods(self) -> int:
        return self.values.shape[2]

    def period(self, l: int) -> np.ndarray:
        """Distance matrix of period ``l``."""
        return self.values[:, :, l]

    def block(self, h: int, l: int) -> np.ndarray:
        """Distance matrix of the macro-period covering periods ``h .. l-1``."""
        if not 0 <= h < l <= self.n_periods:
            raise DomainError(f"empty or invalid period range [{h}, {l})")
        return self.values[:, :, h:l].max(axis=2)

    def arc_rows(self) -> np.ndarray:
        return self.values.reshape(-1, self.n_periods)


def build_worst_table(net: TDNetwork) -> WorstTimeTable:
    """Worst service time of every arc over every period.

    With grid-aligned breakpoints the maximum over ``[t_l, t_{l+1}]`` is
    attained at one of the two endpoints.
    """
    tt = net.tt
    return WorstTimeTable(np.maximum(tt[:, :, :-1], tt[:, :, 1:]), net.horizon)


def macro_worst(table: WorstTimeTable, arc: tuple[int, int], h: int, l: int) -> float:
    """Worst time of ``arc`` over the macro-period made of periods ``h .. l-1``."""
    if not 0 <= h < l <= table.n_periods:
        raise DomainError(f"empty or invalid period range [{h}, {l})")
    i, j = arc
    return float(table.values[i, j, h:l].max())
