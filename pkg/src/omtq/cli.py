"""Command line front end.

Subcommands: solve (optimize one instance), generate (emit benchmark
instances), crosscheck (solve plus independent validation of the
result), bench (run a batch of instances under all engine configurations
and emit CSV).  Exit codes: 0 solved (optimum, unsat or unbounded),
2 usage, 3 parse or validation error, 4 interrupted, 5 failed
crosscheck.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from .arith import format_rat, parse_rat
from .encodings import jobshop_instance, strip_packing_instance
from .formula import OmtProblem
from .omt import (
    INTERRUPTED,
    OPTIMUM,
    UNBOUNDED,
    UNSAT,
    OmtConfig,
    OmtOutcome,
    crosscheck,
    solve,
)
from .parser import ParseError, parse_problem

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_INTERRUPTED = 4
EXIT_CHECK_FAILED = 5

STATS_COLUMNS = [
    "decisions",
    "conflicts",
    "restarts",
    "theory_checks",
    "minimize_calls",
    "pivots",
    "loops",
    "simplex_pivots",
]


def _config_from_args(args) -> OmtConfig:
    return OmtConfig(
        schema=args.schema,
        search=args.search,
        early_pruning=not args.no_early_pruning,
        pure_literal=not args.no_pure_literal,
        timeout=args.timeout,
    )


def _load_problem(path: str, lb, ub) -> OmtProblem:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    problem = parse_problem(text)
    if lb is not None or ub is not None:
        new_lb = lb if lb is not None else problem.lb
        new_ub = ub if ub is not None else problem.ub
        problem = OmtProblem(problem.formula, problem.cost, new_lb, new_ub)
    return problem


def _print_outcome(problem: OmtProblem, outcome: OmtOutcome):
    print(outcome.status)
    if outcome.value is not None:
        attained = "true" if outcome.attained else "false"
        print(f"(objective {format_rat(outcome.value)} :attained {attained})")
    if outcome.model is not None:
        print("(model")
        for name in problem.formula.rat_names:
            if name in outcome.model:
                print(f"  (= {name} {format_rat(outcome.model[name])})")
        print(")")


def _write_stats(path: str, outcome: OmtOutcome):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(STATS_COLUMNS)
        w.writerow([getattr(outcome.stats, c) for c in STATS_COLUMNS])


def cmd_solve(args) -> int:
    try:
        problem = _load_problem(args.file, args.lb, args.ub)
    except (OSError, ParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    outcome = solve(problem, _config_from_args(args))
    _print_outcome(problem, outcome)
    if args.stats:
        _write_stats(args.stats, outcome)
    return EXIT_INTERRUPTED if outcome.status == INTERRUPTED else EXIT_OK


def cmd_crosscheck(args) -> int:
    try:
        problem = _load_problem(args.file, args.lb, args.ub)
    except (OSError, ParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    outcome = solve(problem, _config_from_args(args))
    _print_outcome(problem, outcome)
    if outcome.status == INTERRUPTED:
        print("crosscheck: skipped (interrupted)")
        return EXIT_INTERRUPTED
    ok, msg = crosscheck(problem, outcome)
    print(f"crosscheck: {'pass' if ok else 'fail'} ({msg})")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_generate(args) -> int:
    if args.family == "strip-packing":
        try:
            width = parse_rat(args.width)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        text, _ = strip_packing_instance(args.n, width, args.seed)
    else:
        text, _ = jobshop_instance(args.jobs, args.machines, args.seed)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _bench_one(task):
    path, schema, search, timeout = task
    config = OmtConfig(schema=schema, search=search, timeout=timeout)
    row = {
        "instance": os.path.basename(path),
        "schema": schema,
        "search": search,
        "status": "error",
        "objective": "",
        "attained": "",
        "wall_ms": "",
        "decisions": "",
        "conflicts": "",
        "theory_checks": "",
        "minimize_calls": "",
        "pivots": "",
    }
    try:
        with open(path, "r", encoding="utf-8") as fh:
            problem = parse_problem(fh.read())
        start = time.monotonic()
        outcome = solve(problem, config)
        elapsed = (time.monotonic() - start) * 1000.0
    except (OSError, ParseError, ValueError) as exc:
        row["status"] = f"error: {exc}"
        return row
    row["status"] = outcome.status
    if outcome.value is not None:
        row["objective"] = format_rat(outcome.value)
        row["attained"] = "true" if outcome.attained else "false"
    row["wall_ms"] = f"{elapsed:.1f}"
    for c in ("decisions", "conflicts", "theory_checks", "minimize_calls", "pivots"):
        row[c] = getattr(outcome.stats, c)
    return row


BENCH_COLUMNS = [
    "instance",
    "schema",
    "search",
    "status",
    "objective",
    "attained",
    "wall_ms",
    "decisions",
    "conflicts",
    "theory_checks",
    "minimize_calls",
    "pivots",
]


def cmd_bench(args) -> int:
    tasks = []
    for path in args.files:
        for schema in ("offline", "inline"):
            for search in ("linear", "binary"):
                tasks.append((path, schema, search, args.timeout))
    if args.jobs <= 1:
        rows = [_bench_one(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_bench_one, tasks))
    rows.sort(key=lambda r: (r["instance"], r["schema"], r["search"]))
    out = open(args.output, "w", newline="", encoding="utf-8") if args.output else sys.stdout
    try:
        w = csv.DictWriter(out, fieldnames=BENCH_COLUMNS)
        w.writeheader()
        for r in rows:
            w.writerow(r)
    finally:
        if args.output:
            out.close()
    return EXIT_OK


def _add_engine_options(p: argparse.ArgumentParser):
    p.add_argument("--schema", choices=["offline", "inline"], default="inline")
    p.add_argument("--search", choices=["linear", "binary"], default="binary")
    p.add_argument("--lb", type=Fraction, default=None, help="override the lower range bound")
    p.add_argument("--ub", type=Fraction, default=None, help="override the upper range bound")
    p.add_argument("--timeout", type=float, default=None, help="seconds before giving up")
    p.add_argument("--no-pure-literal", action="store_true")
    p.add_argument("--no-early-pruning", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="omtq", description="Exact linear-rational optimization")
    sub = ap.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="minimize the objective of one instance")
    ps.add_argument("file")
    _add_engine_options(ps)
    ps.add_argument("--stats", metavar="CSV", help="write search statistics to this file")
    ps.set_defaults(func=cmd_solve)

    pc = sub.add_parser("crosscheck", help="solve, then validate the result independently")
    pc.add_argument("file")
    _add_engine_options(pc)
    pc.set_defaults(func=cmd_crosscheck)

    pg = sub.add_parser("generate", help="emit a benchmark instance")
    gsub = pg.add_subparsers(dest="family", required=True)
    gs = gsub.add_parser("strip-packing")
    gs.add_argument("-n", type=int, required=True, help="number of rectangles")
    gs.add_argument("--width", default="1", help="strip width (rational)")
    gs.add_argument("--seed", type=int, default=0)
    gs.add_argument("-o", "--output", default=None)
    gj = gsub.add_parser("jobshop")
    gj.add_argument("--jobs", type=int, required=True)
    gj.add_argument("--machines", type=int, required=True)
    gj.add_argument("--seed", type=int, default=0)
    gj.add_argument("-o", "--output", default=None)
    pg.set_defaults(func=cmd_generate)

    pb = sub.add_parser("bench", help="run instances under every engine configuration")
    pb.add_argument("files", nargs="+")
    pb.add_argument("--timeout", type=float, default=None)
    pb.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    pb.add_argument("-o", "--output", default=None)
    pb.set_defaults(func=cmd_bench)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
