"""Synthetic time-dependent instances.

Nodes are scattered uniformly in a square and every node is both a customer
and a candidate facility.  Each arc gets a dummy length equal to its free-flow
time (access time plus Euclidean distance over the free-flow speed) and a
stepwise speed factor per grid period.  Travel times are obtained by
traversing the length at those speeds from every grid instant, so they are
FIFO by construction.

Congestion is a sum of Gaussian dips in time.  By default a dip hits an arc
with a depth that decays with the distance between the arc midpoint and a
per-peak hotspot and is shifted by a random per-arc delay, so arcs near
different hotspots swap ranks during the day.  Optional incidents add short
random slowdowns on single arcs at any time of day.  ``common_pattern=True``
applies the same factor to every arc instead (all degradations equal one).
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import DomainError
from ..igp import traverse_grid
from ..tdnet import TDNetwork, TimeHorizon


@dataclass(frozen=True)
class Peak:
    center: float
    width: float
    depth: float


DEFAULT_PEAKS = (Peak(480.0, 60.0, 0.75), Peak(1050.0, 75.0, 0.75))


@dataclass(frozen=True)
class GeneratorConfig:
    n: int = 50
    M: int = 120
    td_fraction: float = 0.5
    peaks: tuple[Peak, ...] = DEFAULT_PEAKS
    seed: int = 0
    horizon_end: float = 1440.0
    side: float = 10.0          # km
    free_speed: float = 0.5     # km per minute
    access: float = 1.0         # minutes added to every arc
    floor: float = 0.2          # smallest speed factor
    hotspot_sigma: float = 3.0  # km
    max_shift: float = 45.0     # minutes of per-arc peak delay
    incident_rate: float = 0.0  # incidents per hour over the whole network
    incident_minutes: tuple[float, float] = (10.0, 45.0)
    incident_depth: tuple[float, float] = (0.3, 0.8)
    common_pattern: bool = False
    name: str = field(default="")

    def validate(self) -> None:
        if self.n < 2:
            raise DomainError("need at least two nodes")
        if self.M < 1:
            raise DomainError("need at least one grid instant")
        if not 0.0 <= self.td_fraction <= 1.0:
            raise DomainError("td_fraction must lie in [0, 1]")
        if not 0.0 < self.floor <= 1.0:
            raise DomainError("floor must lie in (0, 1]")
        for pk in self.peaks:
            if pk.width <= 0 or not 0.0 <= pk.depth <= 1.0:
                raise DomainError(f"invalid peak {pk}")
        if self.incident_rate < 0:
            raise DomainError("incident_rate must be non-negative")
        lo, hi = self.incident_minutes
        if not 0 < lo <= hi:
            raise DomainError("incident durations must satisfy 0 < min <= max")
        lo, hi = self.incident_depth
        if not 0 <= lo <= hi <= 1:
            raise DomainError("incident depths must satisfy 0 <= min <= max <= 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["peaks"] = [asdict(p) for p in self.peaks]
        return d


def day_shift_config(n: int = 50, M: int = 120, seed: int = 0, **overrides) -> GeneratorConfig:
    """A 12-hour shift opening in the morning rush and closing in the evening rush.

    Each rush has its own hotspot and random incidents occur all day, so arc
    rankings cross repeatedly over the horizon.
    """
    base = dict(
        n=n, M=M, seed=seed, horizon_end=720.0,
        peaks=(Peak(60.0, 60.0, 0.75), Peak(660.0, 60.0, 0.75)),
        incident_rate=5.0,
    )
    base.update(overrides)
    return GeneratorConfig(**base)


def parse_peaks(spec: str) -> tuple[Peak, ...]:
    """``"480:60:0.7,1050:75:0.7"`` -> peaks (center:width:depth)."""
    out = []
    for chunk in filter(None, (s.strip() for s in spec.split(","))):
        try:
            c, w, dep = (float(x) for x in chunk.split(":"))
        except ValueError:
            raise DomainError(f"bad peak {chunk!r}, expected center:width:depth") from None
        out.append(Peak(c, w, dep))
    return tuple(out)


def _dip(mid: np.ndarray, center, width) -> np.ndarray:
    return np.exp(-0.5 * ((mid - center) / width) ** 2)


def _add_incidents(cfg: GeneratorConfig, rng: np.random.Generator, slow: np.ndarray,
                   inst: np.ndarray, arcs: np.ndarray) -> None:
    if cfg.incident_rate == 0 or arcs.size == 0:
        return
    start, end = inst[0], inst[-1]
    count = rng.poisson(cfg.incident_rate * (end - start) / 60.0)
    hit = rng.choice(arcs, count)
    begin = rng.uniform(start, end, count)
    length = rng.uniform(*cfg.incident_minutes, count)
    depth = rng.uniform(*cfg.incident_depth, count)
    for a, t0, dt, x in zip(hit, begin, length, depth):
        # every period overlapping [t0, t0 + dt]
        lo = max(int(np.searchsorted(inst, t0, side="right")) - 1, 0)
        hi = int(np.searchsorted(inst, t0 + dt, side="left"))
        slow[a, lo:max(hi, lo + 1)] += x


def speed_factors(cfg: GeneratorConfig, rng: np.random.Generator, pts: np.ndarray,
                  horizon: TimeHorizon) -> np.ndarray:
    """Speed factor in (floor, 1] per arc (row-major F x C) and period."""
    n = cfg.n
    inst = horizon.instants
    mid = 0.5 * (inst[:-1] + inst[1:])
    n_arcs = n * n
    if cfg.common_pattern:
        slow = np.zeros_like(mid)
        for pk in cfg.peaks:
            slow += pk.depth * _dip(mid, pk.center, pk.width)
        g = np.maximum(cfg.floor, 1.0 - slow)
        return np.tile(g, (n_arcs, 1))
    arc_mid = 0.5 * (pts[:, None, :] + pts[None, :, :]).reshape(n_arcs, 2)
    td = rng.random(n_arcs) < cfg.td_fraction
    slow = np.zeros((n_arcs, mid.shape[0]))
    for pk in cfg.peaks:
        hotspot = rng.uniform(0.0, cfg.side, 2)
        dist2 = ((arc_mid - hotspot) ** 2).sum(axis=1)
        weight = np.exp(-0.5 * dist2 / cfg.hotspot_sigma**2) * rng.uniform(0.5, 1.0, n_arcs)
        shift = rng.uniform(-cfg.max_shift, cfg.max_shift, n_arcs)
        slow += pk.depth * weight[:, None] * _dip(mid[None, :], pk.center + shift[:, None], pk.width)
    _add_incidents(cfg, rng, slow, inst, np.flatnonzero(td))
    slow[~td] = 0.0
    return np.maximum(cfg.floor, 1.0 - slow)


def generate_instance(cfg: GeneratorConfig) -> TDNetwork:
    """Deterministic synthetic instance for ``cfg`` (same config, same network)."""
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    horizon = TimeHorizon.uniform(cfg.M, end=cfg.horizon_end)
    pts = rng.uniform(0.0, cfg.side, (cfg.n, 2))
    dist = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
    lengths = (cfg.access + dist / cfg.free_speed).reshape(-1)
    factors = speed_factors(cfg, rng, pts, horizon)
    tt = traverse_grid(lengths, factors, horizon.instants)
    ids = [str(k) for k in range(cfg.n)]
    name = cfg.name or f"synthetic-n{cfg.n}-M{cfg.M}-s{cfg.seed}"
    return TDNetwork(ids, ids, horizon, tt.reshape(cfg.n, cfg.n, -1), name=name, seed=cfg.seed)
