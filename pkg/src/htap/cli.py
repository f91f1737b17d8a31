"""``htap`` command line: gen, validate, solve, bench.

Exit codes: 0 ok, 2 invalid instance or parameters, 3 oracle size limit
exceeded, 4 lambda-search failure (solve) or bound violation (bench).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import bench
from .allocators import LambdaSearchError, cycle_split, hetero_minmax_split, naive_allocation
from .instance import (InstanceError, check_allocation, generate_euclidean,
                       generate_example, instance_from_dict, load_instance,
                       validate_metric)
from .metric_tsp import ExactLimitError
from .oracle import exact_minmax

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_LIMIT = 3
EXIT_SEARCH = 4  # also: bench bound violation


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="htap", description="heterogeneous task allocation solvers")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write an instance file")
    g.add_argument("kind", choices=["euclidean", "example1", "example2", "example3", "example4"])
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--n", type=int, default=9)
    g.add_argument("--k", type=int, default=None, help="agents (default 3; example4: 4)")
    g.add_argument("--m", type=int, default=None, help="agent types (default min(3, k))")
    g.add_argument("--gf", type=float, default=0.5, help="generic task fraction")
    g.add_argument("--d", type=float, default=4.0)
    g.add_argument("--dprime", type=float, default=3.0)
    g.add_argument("--out", required=True)

    v = sub.add_parser("validate", help="report every invariant violation of an instance")
    v.add_argument("--instance", required=True)

    s = sub.add_parser("solve", help="allocate tasks for one instance")
    s.add_argument("--instance", required=True)
    s.add_argument("--algo", required=True, choices=["naive", "cyclesplit", "heterominmax", "exact"])
    s.add_argument("--out")
    s.add_argument("--lambda-tol", type=float, default=None,
                   help="absolute binary-search tolerance (default 1e-6 x initial upper end)")
    s.add_argument("--greedy-matching", action="store_true",
                   help="greedy odd-vertex matching; faster, voids the 3/2 tour guarantee")

    b = sub.add_parser("bench", help="run a benchmark suite with bound checks")
    b.add_argument("--suite", required=True, choices=bench.SUITES)
    b.add_argument("--seeds", type=int, default=None)
    b.add_argument("--csv")
    b.add_argument("--plot-data")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--lambda-tol", type=float, default=None)
    b.add_argument("--greedy-matching", action="store_true")
    return p


def cmd_gen(args) -> int:
    try:
        if args.kind == "euclidean":
            k = 3 if args.k is None else args.k
            m = min(3, k) if args.m is None else args.m
            inst = generate_euclidean(args.seed, args.n, k, m, args.gf)
        else:
            which = int(args.kind[-1])
            inst = generate_example(which, d=args.d, d_prime=args.dprime,
                                          k=4 if args.k is None else args.k)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    inst.save(args.out)
    print(f"wrote {args.out}: {inst.n_tasks} tasks, {inst.k} agents, {inst.m} types")
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        inst = instance_from_dict(json.loads(Path(args.instance).read_text(encoding="utf-8")))
    except (json.JSONDecodeError, InstanceError, OSError) as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_INVALID
    problems = validate_metric(inst)
    for v in problems:
        print(v)
    if problems:
        return EXIT_INVALID
    print(f"ok: {inst.n_tasks} tasks, {inst.k} agents, {inst.m} types")
    return EXIT_OK


def cmd_solve(args) -> int:
    try:
        inst = load_instance(args.instance)
    except (InstanceError, OSError) as exc:
        print(f"invalid instance: {exc}", file=sys.stderr)
        return EXIT_INVALID

    trace = None
    try:
        if args.algo == "naive":
            alloc = naive_allocation(inst, greedy=args.greedy_matching)
        elif args.algo == "cyclesplit":
            alloc = cycle_split(inst, greedy=args.greedy_matching)
        elif args.algo == "heterominmax":
            alloc, search = hetero_minmax_split(inst, tolerance=args.lambda_tol,
                                                greedy=args.greedy_matching)
            trace = search.to_dict()
        else:
            alloc = exact_minmax(inst).allocation
    except ExactLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except LambdaSearchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(json.dumps(exc.search.to_dict(), indent=1), file=sys.stderr)
        return EXIT_SEARCH
    check_allocation(inst, alloc)

    print(f"instance {inst.name}: {inst.n_tasks} tasks, {inst.k} agents, {inst.m} types")
    print(f"algorithm {args.algo}")
    print(f"minmax {alloc.minmax:.10g}")
    print(f"{'agent':>6} {'type':>5} {'tasks':>6} {'cost':>14}")
    types = {a.id: a.type for a in inst.agents}
    for p in alloc.plans:
        print(f"{p.agent_id:>6} {types[p.agent_id]:>5} {len(p.tasks):>6} {p.cost:>14.10g}")
    if args.greedy_matching:
        print("note: greedy matching in use; the 3/2 tour guarantee does not apply")
    if args.out:
        data = alloc.to_dict(inst)
        data["algorithm"] = args.algo
        if trace is not None:
            data["lambda_trace"] = trace
        Path(args.out).write_text(json.dumps(data, indent=1) + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_bench(args) -> int:
    records, problems = bench.run_suite(args.suite, args.seeds, jobs=args.jobs,
                                        greedy=args.greedy_matching, lambda_tol=args.lambda_tol)
    text = bench.records_csv(records)
    if args.csv:
        Path(args.csv).write_text(text, encoding="utf-8")
    if args.plot_data:
        bench.write_plot_data(args.plot_data, args.suite, records)

    by_algo: dict[str, list] = {}
    for r in records:
        by_algo.setdefault(r.algo, []).append(r)
    print(f"suite {args.suite}: {len({(r.instance, r.seed) for r in records})} instances")
    print(f"{'algo':>13} {'runs':>5} {'max ratio':>10} {'mean ratio':>11} {'mean ms':>9}")
    for algo, recs in by_algo.items():
        ratios = [r.ratio for r in recs if r.ratio is not None]
        worst = f"{max(ratios):10.4f}" if ratios else f"{'-':>10}"
        mean = f"{sum(ratios) / len(ratios):11.4f}" if ratios else f"{'-':>11}"
        ms = sum(r.wall_ms for r in recs) / len(recs)
        print(f"{algo:>13} {len(recs):>5} {worst} {mean} {ms:9.1f}")
    for p in problems:
        print(f"VIOLATION {p}", file=sys.stderr)
    return EXIT_SEARCH if problems else EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"gen": cmd_gen, "validate": cmd_validate, "solve": cmd_solve, "bench": cmd_bench}
    return handler[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
