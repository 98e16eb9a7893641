"""Benchmark harness: solve every (instance, p, K) cell and average per (p, K)."""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, Union

from ..errors import MPCPError
from ..planner import RelocationPlan
from ..solver import evaluate, exact_small, lower_bound, metrics, phase_two, solve
from ..tdnet import TDNetwork, build_worst_table
from .instance import read_instance

BENCH_COLUMNS = ("p", "K", "gap", "phase1_s", "phase2_s", "total_s", "gain")
# exhaustive K = 0 reference only when the set-by-customer-by-period table stays small
ORACLE_CELLS = 4_000_000

KSpec = Union[int, str]


@dataclass(frozen=True)
class BenchCell:
    instance: str
    p: int
    K: int
    gap: float = math.nan
    gain: float = math.nan
    phase1_s: float = math.nan
    phase2_s: float = math.nan
    total_s: float = math.nan
    error: str | None = None
    gain_exact: float = math.nan

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class BenchRow:
    p: int
    K: int
    gap: float
    phase1_s: float
    phase2_s: float
    total_s: float
    gain: float
    n_ok: int = 0
    n_failed: int = 0
    gain_exact: float = math.nan

    def values(self) -> tuple:
        return tuple(getattr(self, c) for c in BENCH_COLUMNS)


@dataclass
class BenchReport:
    rows: list[BenchRow]
    cells: list[BenchCell] = field(default_factory=list)

    @property
    def failures(self) -> list[BenchCell]:
        return [c for c in self.cells if not c.ok]

    def row(self, p: int, K: int) -> BenchRow:
        for r in self.rows:
            if r.p == p and r.K == K:
                return r
        raise KeyError((p, K))

    def to_csv(self, path=None, extended: bool = False) -> str:
        """CSV text (also written to ``path`` if given).

        ``extended`` appends ``gain_exact``, the gain measured against the
        exhaustive K = 0 optimum (NaN above oracle scale).
        """
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(BENCH_COLUMNS + (("gain_exact",) if extended else ()))
        for r in self.rows:
            vals = r.values()[2:] + ((r.gain_exact,) if extended else ())
            w.writerow([r.p, r.K, *(repr(float(v)) for v in vals)])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text


def parse_k_list(spec: str | Iterable[KSpec]) -> list[KSpec]:
    """``"0,2,4,all"`` -> ``[0, 2, 4, "all"]``; ``"M"`` is accepted as ``"all"``."""
    items = spec.split(",") if isinstance(spec, str) else list(spec)
    out: list[KSpec] = []
    for it in items:
        s = str(it).strip()
        if not s:
            continue
        out.append("all" if s.lower() in ("all", "m") else int(s))
    return out


def _resolve_k(k: KSpec, M: int) -> int:
    return M if k == "all" else int(k)


def exact_reference(net: TDNetwork, p: int) -> float | None:
    """Exhaustive K = 0 optimum, or None when the instance is above oracle scale."""
    n_fac, n_cus = len(net.facilities), len(net.customers)
    if not 1 <= p <= n_fac:
        return None
    if math.comb(n_fac, p) * p * n_cus * net.horizon.n_periods > ORACLE_CELLS:
        return None
    return exact_small(net, p, 0).value


def _run_pair(net: TDNetwork, label: str, p: int, ks: Sequence[int]) -> list[BenchCell]:
    """All K cells of one (instance, p); LB and the K = 0 references are shared."""
    try:
        table = build_worst_table(net)
        lb = lower_bound(net, p, table)
        empty = RelocationPlan.empty(net.horizon)
        r0 = evaluate(table, empty, [s.facilities for s in phase_two(table, empty, p)]).objective
        r0_exact = exact_reference(net, p)
    except MPCPError as exc:
        return [BenchCell(label, p, K, error=f"{type(exc).__name__}: {exc}") for K in ks]
    cells = []
    for K in ks:
        try:
            rep = solve(net, p, K, lower_bound_value=lb, reference_r0=r0, table=table)
        except MPCPError as exc:
            cells.append(BenchCell(label, p, K, error=f"{type(exc).__name__}: {exc}"))
            continue
        g_exact = math.nan if r0_exact is None else metrics(rep.objective, lb, r0_exact)["gain"]
        cells.append(BenchCell(label, p, K, rep.gap, rep.gain, rep.phase1_s, rep.phase2_s, rep.total_s,
                               gain_exact=g_exact))
    return cells


def _job(args):
    idx, net, label, p, ks = args
    return idx, p, _run_pair(net, label, p, ks)


def _aggregate(cells: list[BenchCell]) -> list[BenchRow]:
    groups: dict[tuple[int, int], list[BenchCell]] = {}
    for c in cells:
        groups.setdefault((c.p, c.K), []).append(c)
    rows = []
    for (p, K) in sorted(groups):
        grp = groups[(p, K)]
        good = [c for c in grp if c.ok]

        def mean(attr):
            vals = [getattr(c, attr) for c in good if not math.isnan(getattr(c, attr))]
            return math.fsum(vals) / len(vals) if vals else math.nan

        rows.append(BenchRow(p, K, mean("gap"), mean("phase1_s"), mean("phase2_s"), mean("total_s"),
                             mean("gain"), len(good), len(grp) - len(good), mean("gain_exact")))
    return rows


def run_bench(instances: Sequence, p_list: Sequence[int], k_list: Sequence[KSpec], jobs: int = 1) -> BenchReport:
    """Solve every instance for every p and K (K = M is always included).

    ``instances`` holds networks or paths to instance files.  With ``jobs > 1``
    the (instance, p) pairs run in a process pool; the report does not depend
    on completion order.
    """
    tasks = []
    load_failures: list[BenchCell] = []
    for idx, inst in enumerate(instances):
        if isinstance(inst, TDNetwork):
            net, label = inst, inst.name or f"instance-{idx}"
        else:
            label = str(inst)
            try:
                net = read_instance(inst)
            except MPCPError as exc:
                err = f"{type(exc).__name__}: {exc}"
                ks = sorted({k for k in k_list if isinstance(k, int)}) or [0]
                load_failures += [BenchCell(label, int(p), K, error=err) for p in p_list for K in ks]
                continue
        M = net.horizon.M
        for p in p_list:
            ks = sorted({_resolve_k(k, M) for k in k_list} | {M})
            tasks.append((idx, net, label, int(p), ks))
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_job, tasks))
    else:
        results = [_job(t) for t in tasks]
    results.sort(key=lambda r: (r[0], r[1]))
    cells = [c for _, _, cs in results for c in cs] + load_failures
    return BenchReport(_aggregate(cells), cells)
