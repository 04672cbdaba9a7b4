"""Command-line entry point: ``geoapprox <problem> --input F ...``.

Exit codes: 0 success with a valid solution, 1 usage or input error,
2 validation failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench
from .geom import InstanceFormatError, read_instance
from .mps import PreconditionError
from .oracle import CapExceeded, exact_mcm, exact_mis, exact_mps, exact_vc
from .sampling import estimate_mis_value, estimate_mps_value

EXIT_OK, EXIT_USAGE, EXIT_INVALID = 0, 1, 2


class UsageError(Exception):
    pass


def _common(p: argparse.ArgumentParser, report: bool = True):
    p.add_argument("--input", required=True, help="instance file, one JSON record per line")
    p.add_argument("--seed", type=int, default=0, help="seed for all randomness (default 0)")
    if report:
        p.add_argument("--report", help="write the JSON report here (default: stdout)")
        p.add_argument("--timing", action="store_true",
                       help="include wall time in the report (reports are otherwise byte-stable)")


def _solver_flags(p: argparse.ArgumentParser):
    p.add_argument("--mode", choices=("static", "dynamic"), default="static",
                   help="one-shot solve, or replay the input as inserts (or --stream)")
    p.add_argument("--stream", help="update stream file for dynamic mode")
    p.add_argument("--validate", action="store_true",
                   help="exit 2 unless the solution passes its validator")
    p.add_argument("--no-oracle", action="store_true", help="skip the exact oracle comparison")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="geoapprox", description="Approximation algorithms for "
                                 "piercing, independent set, vertex cover and matching on "
                                 "geometric objects.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mps", help="minimum piercing set")
    _common(p)
    _solver_flags(p)
    p.add_argument("--family", choices=("box", "fat"), default="box")
    p.add_argument("--b", type=int, default=4, help="fan-out / cells per node (default 4)")
    p.add_argument("--oracle", choices=("exact", "greedy"), default="exact",
                   help="subproblem oracle (default exact)")

    p = sub.add_parser("mis", help="maximum (weight) independent set")
    _common(p)
    _solver_flags(p)
    p.add_argument("--family", choices=("rect", "box", "fat"), default="rect")
    p.add_argument("--b", type=int, default=4)
    p.add_argument("--weighted", action="store_true")
    p.add_argument("--oracle", choices=("exact", "greedy"), default="exact")

    p = sub.add_parser("vc", help="minimum vertex cover")
    _common(p)
    _solver_flags(p)
    p.add_argument("--family", required=True,
                   choices=("disk", "rect", "fatbox", "bipartite-disk", "bipartite-box"))
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--gamma", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=0.01, help="kernel threshold granularity")
    p.add_argument("--mwu-delta", type=float, default=0.1, help="fractional solver accuracy")

    p = sub.add_parser("mcm", help="maximum-cardinality matching")
    _common(p)
    _solver_flags(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--bipartite", dest="bipartite", action="store_true", default=False)
    g.add_argument("--general", dest="bipartite", action="store_false")
    p.add_argument("--eps", type=float, default=1 / 3)
    p.add_argument("--trials", type=int, help="hash maps per color-coding family")

    p = sub.add_parser("estimate", help="value-only sampling estimate")
    _common(p)
    p.add_argument("--problem", choices=("mps", "mis"), required=True)
    p.add_argument("--family", choices=("box", "rect"), default=None)
    p.add_argument("--eps", type=float, default=0.3)
    p.add_argument("--b", type=int, default=4)
    p.add_argument("--weighted", action="store_true")
    p.add_argument("--trials", type=int, default=15, help="median-of trials (odd)")

    p = sub.add_parser("oracle", help="exact brute-force value")
    _common(p)
    p.add_argument("--op", "--problem", dest="problem", choices=("mps", "mis", "vc", "mcm"),
                   required=True, help="which exact solver to run")
    p.add_argument("--weighted", action="store_true")
    p.add_argument("--bipartite", action="store_true")

    p = sub.add_parser("bench", help="run an experiment suite")
    p.add_argument("--config", required=True, help="JSON suite config")
    p.add_argument("--out", required=True, help="output directory for report.jsonl/report.csv")
    return ap


def _emit(report: dict, args) -> None:
    if not getattr(args, "timing", False):
        report.pop("wall_ms", None)
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if getattr(args, "report", None):
        Path(args.report).write_text(text, encoding="utf-8")
        summary = {k: report.get(k) for k in ("value", "oracle_value", "validity") if k in report}
        print(json.dumps(summary, sort_keys=True))
    else:
        sys.stdout.write(text)


def _solve(args) -> int:
    objs = read_instance(args.input)
    params: dict = {"seed": args.seed}
    if args.command in ("mps", "mis"):
        params.update(b=args.b, oracle=args.oracle)
        if args.command == "mis":
            params["weighted"] = args.weighted
        family = args.family
    elif args.command == "vc":
        params.update(eps=args.eps, gamma=args.gamma, delta=args.delta, mwu_delta=args.mwu_delta)
        family = args.family
    else:
        params.update(eps=args.eps, trials=args.trials)
        family = "bipartite" if args.bipartite else "general"
    stream = None
    if args.stream:
        if args.mode != "dynamic":
            raise UsageError("--stream needs --mode dynamic")
        stream = bench.UpdateStream.loads(Path(args.stream).read_text(encoding="utf-8"))
    report = bench.run_problem(args.command, family, objs, params, args.mode, stream,
                               oracle=not args.no_oracle)
    report["validation"] = "pass" if report["validity"] else "fail"
    _emit(report, args)
    if not report["validity"]:
        print(f"validation failed: {report['violations']} violation(s)", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def _estimate(args) -> int:
    objs = read_instance(args.input)
    if args.problem == "mps":
        est = estimate_mps_value(objs, args.family or "box", args.eps, args.b, args.trials, args.seed)
    else:
        est = estimate_mis_value(objs, args.family or "rect", args.eps, args.weighted, args.b,
                                 args.trials, args.seed)
    _emit({"problem": args.problem, "estimate": est.value, **est.as_dict()}, args)
    return EXIT_OK


def _oracle(args) -> int:
    objs = read_instance(args.input)
    if args.problem == "mps":
        sol = exact_mps(objs)
        rep = {"value": sol.value, "exact": sol.exact, "points": [list(p) for p in sol.points]}
    elif args.problem == "mis":
        sol = exact_mis(objs, args.weighted)
        rep = {"value": sol.value, "ids": sorted(sol.ids)}
    elif args.problem == "vc":
        sol = exact_vc(objs)
        rep = {"value": sol.value, "ids": sorted(sol.ids)}
    else:
        m = exact_mcm(objs, args.bipartite, cap=0)
        rep = {"value": m.size, "pairs": [list(p) for p in m.pairs()]}
    rep["problem"] = args.problem
    _emit(rep, args)
    return EXIT_OK


def _bench(args) -> int:
    cfg_path = Path(args.config)
    config = json.loads(cfg_path.read_text(encoding="utf-8"))
    rows = bench.run_suite(config, args.out, base_dir=cfg_path.parent)
    bad = sum(1 for r in rows if not r.get("validity"))
    print(f"{len(rows)} row(s), {bad} invalid or failed; report in {args.out}")
    return EXIT_OK


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    handlers = {"mps": _solve, "mis": _solve, "vc": _solve, "mcm": _solve,
                "estimate": _estimate, "oracle": _oracle, "bench": _bench}
    try:
        return handlers[args.command](args)
    except InstanceFormatError as exc:
        print(f"error: {args.input}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, UsageError, PreconditionError, CapExceeded, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
