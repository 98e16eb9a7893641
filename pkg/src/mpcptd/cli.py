"""Command line entry point (``mpcptd``)."""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .errors import DomainError, IGPDerivationError, InfeasibleParametersError, InstanceError, MPCPError
from .igp import check_ranking_invariance, factorize_network
from .solver import period_optima, solve
from .tdnet import build_worst_table
from .workbench.bench import BENCH_COLUMNS, parse_k_list, run_bench
from .workbench.generator import GeneratorConfig, day_shift_config, generate_instance, parse_peaks
from .workbench.instance import instance_to_dict, read_instance, write_instance

EXIT_OK, EXIT_ERROR, EXIT_INVALID, EXIT_INFEASIBLE = 0, 1, 2, 3


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _k_value(text: str, M: int) -> int:
    if text.lower() in ("all", "m"):
        return M
    try:
        return int(text)
    except ValueError:
        raise InfeasibleParametersError(f"K must be an integer, 'all' or 'M', got {text!r}") from None


def _config(args, seed: int) -> GeneratorConfig:
    kw = {"n": args.n, "M": args.M, "seed": seed}
    if args.td_fraction is not None:
        kw["td_fraction"] = args.td_fraction
    if args.peaks is not None:
        kw["peaks"] = parse_peaks(args.peaks)
    if args.horizon_end is not None:
        kw["horizon_end"] = args.horizon_end
    if args.incident_rate is not None:
        kw["incident_rate"] = args.incident_rate
    if args.common_pattern:
        kw["common_pattern"] = True
    if args.preset == "day-shift":
        return day_shift_config(**kw)
    return GeneratorConfig(**kw)


def cmd_gen(args) -> int:
    if args.dir:
        out = Path(args.dir)
        out.mkdir(parents=True, exist_ok=True)
        for k in range(args.count):
            seed = args.seed + k
            path = out / f"instance-n{args.n}-M{args.M}-s{seed}.json"
            write_instance(path, generate_instance(_config(args, seed)))
            print(path)
        return EXIT_OK
    net = generate_instance(_config(args, args.seed))
    if args.out:
        write_instance(args.out, net)
        print(args.out)
    else:
        json.dump(instance_to_dict(net), sys.stdout, separators=(",", ":"))
        sys.stdout.write("\n")
    return EXIT_OK


def cmd_solve(args) -> int:
    net = read_instance(args.instance)
    K = _k_value(args.k, net.horizon.M)
    rep = solve(net, args.p, K, certify=args.certify)
    if args.json:
        json.dump(rep.to_dict(net), sys.stdout, indent=2)
        sys.stdout.write("\n")
    elif args.csv:
        print(",".join(BENCH_COLUMNS))
        print(",".join(repr(v) for v in (rep.p, rep.K, rep.gap, rep.phase1_s, rep.phase2_s, rep.total_s, rep.gain)))
    else:
        sol = rep.solution
        print(f"instance   {net.name or args.instance}")
        print(f"p={rep.p} K={rep.K}  objective {rep.objective:.6g}  lower bound {rep.lower_bound:.6g}")
        print(f"GAP {100 * rep.gap:.2f}%  GAIN {rep.gain:.3f}  relocations {sol.relocations}")
        print(f"phase I {rep.phase1_s:.3f}s  phase II {rep.phase2_s:.3f}s")
        for (s, e), O in zip(sol.plan.macro_periods, sol.seeds):
            print(f"  [{s:g}, {e:g}]  " + " ".join(str(net.facilities[i]) for i in O))
        if rep.certificate is not None:
            c = rep.certificate
            print(f"certificate: min degradation {c.min_degradation:.6g}, optimal={c.optimal}")
            for w in c.witnesses:
                print(f"  crossing {w[0]} vs {w[1]} in periods {w[2]}")
    return EXIT_OK


def cmd_lb(args) -> int:
    net = read_instance(args.instance)
    opts = period_optima(net, args.p)
    total = math.fsum(r.radius for r in opts)
    if args.json:
        json.dump({"p": args.p, "lower_bound": total, "period_radii": [r.radius for r in opts]}, sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:
        print(repr(total))
    return EXIT_OK


def cmd_bench(args) -> int:
    paths = sorted(Path(args.dir).glob("*.json"))
    if not paths:
        print(f"no instance files in {args.dir}", file=sys.stderr)
        return EXIT_INVALID
    report = run_bench(paths, args.p, parse_k_list(args.k), jobs=args.jobs)
    text = report.to_csv(args.out, extended=args.exact_reference)
    if not args.out:
        sys.stdout.write(text)
    for cell in report.failures:
        print(f"failed: {cell.instance} p={cell.p} K={cell.K}: {cell.error}", file=sys.stderr)
    return EXIT_OK


def cmd_check(args) -> int:
    net = read_instance(args.instance)
    table = build_worst_table(net)
    rank = check_ranking_invariance(table)
    fact = factorize_network(net)
    out = {
        "instance": net.name or str(args.instance),
        "facilities": len(net.facilities),
        "customers": len(net.customers),
        "M": net.horizon.M,
        "valid": True,
        "min_degradation": fact.min_degradation,
        "ranking_invariant": rank.invariant,
    }
    if not rank.invariant:
        e1, e2 = rank.witness
        out["witness"] = {"arcs": [list(net.arc_label(e1)), list(net.arc_label(e2))], "periods": list(rank.periods)}
    if args.json:
        json.dump(out, sys.stdout, indent=2, default=str)
        sys.stdout.write("\n")
    else:
        print(f"{out['instance']}: valid, {out['facilities']}x{out['customers']} arcs, M={out['M']}")
        print(f"min degradation = {fact.min_degradation:.6g}")
        print(f"ranking invariant: {'yes' if rank.invariant else 'no'}")
        if not rank.invariant:
            w = out["witness"]
            print(f"  witness {tuple(w['arcs'][0])} vs {tuple(w['arcs'][1])} swap between periods {w['periods']}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mpcptd", description="Multi-period p-center with time-dependent travel times")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate synthetic instances")
    g.add_argument("--n", type=int, default=50)
    g.add_argument("--M", type=int, default=120)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--preset", choices=("default", "day-shift"), default="default")
    g.add_argument("--td-fraction", type=float)
    g.add_argument("--peaks", help="center:width:depth[,...] in minutes")
    g.add_argument("--horizon-end", type=float)
    g.add_argument("--incident-rate", type=float, help="incidents per hour")
    g.add_argument("--common-pattern", action="store_true")
    g.add_argument("--out", help="output file (default: stdout)")
    g.add_argument("--dir", help="write --count instances into this directory")
    g.add_argument("--count", type=int, default=1)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="run the two-phase heuristic")
    s.add_argument("--instance", required=True)
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--k", required=True, help="relocations: integer, 'all' or 'M'")
    s.add_argument("--certify", action="store_true")
    fmt = s.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true")
    fmt.add_argument("--csv", action="store_true")
    s.set_defaults(func=cmd_solve)

    lb = sub.add_parser("lb", help="lower bound (relocation allowed at every instant)")
    lb.add_argument("--instance", required=True)
    lb.add_argument("--p", type=int, required=True)
    lb.add_argument("--json", action="store_true")
    lb.set_defaults(func=cmd_lb)

    b = sub.add_parser("bench", help="benchmark a directory of instances")
    b.add_argument("--dir", required=True)
    b.add_argument("--p", type=_int_list, default=[5, 10])
    b.add_argument("--k", default="0,2,4,6,8,10,all")
    b.add_argument("--out", help="CSV output file (default: stdout)")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--exact-reference", action="store_true",
                   help="add gain_exact: gain against the exhaustive K=0 optimum (small instances only)")
    b.set_defaults(func=cmd_bench)

    c = sub.add_parser("check", help="validate an instance and report ranking invariance")
    c.add_argument("--instance", required=True)
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_check)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InstanceError, IGPDerivationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except MPCPError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
