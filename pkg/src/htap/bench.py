"""Benchmark suites: run every algorithm (plus the oracle when it fits) and
check each ratio against its theoretical bound."""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .allocators import ALGORITHMS, solve
from .instance import Instance, check_allocation, generate_euclidean, generate_example
from .metric_tsp import ExactLimitError
from .oracle import DEFAULT_MAX_AGENTS, default_max_tasks, exact_minmax

SUITES = ("paper-examples", "random-small", "random-large")
CSV_HEADER = ("instance", "seed", "algo", "minmax", "ratio", "wall_ms")
RATIO_EPS = 1e-6

# min-max values stated for the illustrative examples
EXAMPLE_VALUES = {
    "example1-d4-dp3": {"cyclesplit": 11.0, "heterominmax": 10.0, "exact": 10.0},
    "example2": {"heterominmax": 2.0},
    "example3": {"cyclesplit": 4.0, "heterominmax": 2.0, "exact": 2.0},
    "example4-k5": {"cyclesplit": 4.0, "heterominmax": 2.0},
}


@dataclass(frozen=True)
class BenchRecord:
    instance: str
    seed: int | None
    algo: str
    minmax: float
    ratio: float | None
    wall_ms: float

    def row(self) -> list[str]:
        return [self.instance, "" if self.seed is None else str(self.seed), self.algo,
                repr(self.minmax), "" if self.ratio is None else repr(self.ratio),
                f"{self.wall_ms:.3f}"]


def one_agent_per_type(inst: Instance) -> bool:
    return all(inst.m_i(t) == 1 for t in inst.agent_types)


def ratio_bound(inst: Instance, algo: str) -> float:
    k = inst.k
    if algo == "naive":
        return 1.5 * k
    if algo in ("cyclesplit", "heterominmax"):
        return 4.0 - 1.0 / k if one_agent_per_type(inst) else 5.0 - 2.0 / k
    return 1.0


def small_instance(seed: int) -> Instance:
    """Seeded instance with at most 9 tasks and 3 agents."""
    rng = np.random.default_rng(10_000 + seed)
    n = int(rng.integers(1, 10))
    k = int(rng.integers(1, 4))
    m = int(rng.integers(1, k + 1))
    gf = float(rng.choice([0.0, 0.25, 0.5, 0.75, 1.0]))
    return generate_euclidean(seed, n, k, m, gf)


def large_instance(seed: int) -> Instance:
    return generate_euclidean(seed, 200, 12, 4, 0.5)


def suite_instances(suite: str, seeds: int | None) -> list[tuple[Instance, int | None]]:
    if suite == "paper-examples":
        return [(generate_example(1, d=4, d_prime=3), None),
                (generate_example(2), None),
                (generate_example(3), None),
                (generate_example(4, k=5), None)]
    if suite == "random-small":
        return [(small_instance(s), s) for s in range(200 if seeds is None else seeds)]
    if suite == "random-large":
        return [(large_instance(s), s) for s in range(10 if seeds is None else seeds)]
    raise ValueError(f"unknown suite {suite!r}")


def _timed(fn: Callable):
    start = time.perf_counter()
    out = fn()
    return out, 1000.0 * (time.perf_counter() - start)


def run_instance(inst: Instance, seed: int | None, greedy: bool = False,
                 lambda_tol: float | None = None,
                 max_tasks: int | None = None) -> tuple[list[BenchRecord], list[str]]:
    """Run all algorithms on one instance; returns records and bound violations."""
    max_tasks = default_max_tasks() if max_tasks is None else max_tasks
    results = {}
    for algo in ALGORITHMS:
        kw = {"greedy": greedy}
        if algo == "heterominmax" and lambda_tol is not None:
            kw["tolerance"] = lambda_tol
        alloc, ms = _timed(lambda: solve(inst, algo, **kw))
        check_allocation(inst, alloc)
        results[algo] = (alloc.minmax, ms)

    opt = None
    if inst.n_tasks <= max_tasks and inst.k <= DEFAULT_MAX_AGENTS:
        try:
            exact, ms = _timed(lambda: exact_minmax(inst, max_tasks=max_tasks))
            opt = exact.minmax
            results["exact"] = (opt, ms)
        except ExactLimitError:
            opt = None

    eps = inst.tol()
    records, problems = [], []
    for algo, (value, ms) in results.items():
        ratio = None
        if opt is not None:
            ratio = value / opt if opt > eps else (1.0 if value <= eps else float("inf"))
            bound = ratio_bound(inst, algo)
            if ratio > bound + RATIO_EPS or ratio < 1.0 - RATIO_EPS:
                problems.append(f"{inst.name} seed={seed} {algo}: ratio {ratio:.6f} "
                                f"outside [1, {bound:.6f}]")
        expected = EXAMPLE_VALUES.get(inst.name, {}).get(algo)
        if expected is not None and abs(value - expected) > 1e-9 * max(1.0, expected):
            problems.append(f"{inst.name} {algo}: min-max {value!r}, expected {expected!r}")
        records.append(BenchRecord(inst.name, seed, algo, value, ratio, ms))
    return records, problems


def _run_star(args):
    return run_instance(*args)


def run_suite(suite: str, seeds: int | None = None, jobs: int = 1, greedy: bool = False,
              lambda_tol: float | None = None) -> tuple[list[BenchRecord], list[str]]:
    work = [(inst, seed, greedy, lambda_tol, default_max_tasks())
            for inst, seed in suite_instances(suite, seeds)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outputs = list(pool.map(_run_star, work))
    else:
        outputs = [_run_star(w) for w in work]
    records = [r for recs, _ in outputs for r in recs]
    problems = [p for _, probs in outputs for p in probs]
    return records, problems


def records_csv(records: list[BenchRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in records:
        writer.writerow(r.row())
    return buf.getvalue()


def plot_data(suite: str, records: list[BenchRecord]) -> dict:
    """Per-algorithm ratio series, one point per instance, in suite order."""
    series: dict[str, list[dict]] = {}
    for r in records:
        series.setdefault(r.algo, []).append(
            {"instance": r.instance, "seed": r.seed, "minmax": r.minmax, "ratio": r.ratio})
    return {"suite": suite, "series": series}


def write_plot_data(path, suite: str, records: list[BenchRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(plot_data(suite, records), fh, indent=1)
        fh.write("\n")
