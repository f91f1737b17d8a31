"""Exit criteria.  Each test prints one ``[acceptance]`` line with its verdict."""

import time

import numpy as np
import pytest

from htap import tour_split
from htap.allocators import Allocation, cycle_split, hetero_minmax_split, hetero_split, naive_allocation
from htap.bench import one_agent_per_type, small_instance
from htap.instance import check_allocation, check_tour, generate_euclidean, generate_example
from htap.metric_tsp import (TourCache, christofides_tour, held_karp_tour, matching_weight,
                             min_weight_perfect_matching)
from htap.oracle import exact_minmax

RATIO_EPS = 1e-6
N_RANDOM = 300


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[acceptance] criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")
        assert ok, detail

    return emit


def close(a, b):
    return abs(a - b) <= 1e-9 * max(1.0, abs(b))


def test_criterion_1_example_values(report):
    start = time.perf_counter()
    failures = []

    def expect(label, got, want):
        if not close(got, want):
            failures.append(f"{label}: {got!r} != {want!r}")

    d, dp = 4.0, 3.0
    ex1 = generate_example(1, d=d, d_prime=dp)
    expect("ex1 cyclesplit", cycle_split(ex1).minmax, 2 * dp + d + 1)
    expect("ex1 heterominmax", hetero_minmax_split(ex1)[0].minmax, 2 * dp + 4)

    ex2 = generate_example(2)
    cache = TourCache(ex2)
    phase2 = [{1, 3}, {2, 4}]  # each type-1 agent holds one task at A and one at B
    for s in phase2:
        expect("ex2 before rebalance", cache.cost(s), 4.0)
    pooled = tour_split.splitour(cache.tour(phase2[0] | phase2[1]), 2, ex2)
    for sub in pooled.subtours:
        expect("ex2 after rebalance", sub.cost, 2.0)
    expect("ex2 heterominmax", hetero_minmax_split(ex2)[0].minmax, 2.0)

    ex3 = generate_example(3)
    expect("ex3 cyclesplit", cycle_split(ex3).minmax, 4.0)
    expect("ex3 heterominmax", hetero_minmax_split(ex3)[0].minmax, 2.0)
    expect("ex3 oracle", exact_minmax(ex3).minmax, 2.0)

    for k in (2, 3, 5):
        ex4 = generate_example(4, k=k)
        expect(f"ex4 k={k} cyclesplit", cycle_split(ex4).minmax, 4.0)
        expect(f"ex4 k={k} heterominmax", hetero_minmax_split(ex4)[0].minmax, 2.0)

    elapsed = time.perf_counter() - start
    if elapsed >= 1.0:
        failures.append(f"runtime {elapsed:.3f}s >= 1s")
    report(1, not failures, "; ".join(failures) or f"all example values matched in {elapsed:.3f}s")


def test_criterion_2_approximation_bounds(report):
    start = time.perf_counter()
    failures = []
    worst = {"naive": 0.0, "cyclesplit": 0.0, "heterominmax": 0.0}
    distinct = 0
    for seed in range(N_RANDOM):
        inst = small_instance(seed)
        assert inst.n_tasks <= 9 and inst.k <= 3 and inst.m <= 3
        opt = exact_minmax(inst).minmax
        k = inst.k
        one = one_agent_per_type(inst)
        distinct += one
        bounds = {"naive": 1.5 * k,
                  "cyclesplit": 4 - 1 / k if one else 5 - 2 / k,
                  "heterominmax": 4 - 1 / k if one else 5 - 2 / k}
        values = {"naive": naive_allocation(inst).minmax,
                  "cyclesplit": cycle_split(inst).minmax,
                  "heterominmax": hetero_minmax_split(inst)[0].minmax}
        for algo, value in values.items():
            ratio = value / opt if opt > 0 else 1.0
            worst[algo] = max(worst[algo], ratio / bounds[algo])
            if ratio > bounds[algo] + RATIO_EPS:
                failures.append(f"seed {seed} {algo}: ratio {ratio:.6f} > {bounds[algo]:.6f}")
    elapsed = time.perf_counter() - start
    if elapsed >= 120:
        failures.append(f"runtime {elapsed:.1f}s >= 120s")
    if distinct == 0:
        failures.append("no one-agent-per-type instances exercised")
    detail = (f"{N_RANDOM} instances ({distinct} one-agent-per-type), worst ratio/bound "
              + ", ".join(f"{a} {w:.3f}" for a, w in worst.items()) + f", {elapsed:.1f}s")
    report(2, not failures, "; ".join(failures[:5]) or detail)


def test_criterion_3_splitour_bound(report):
    # the bound is asserted inside every splitour call; this drives enough calls
    for seed in range(150):
        inst = small_instance(seed)
        cycle_split(inst)
        hetero_minmax_split(inst)
    for seed in range(50):
        inst = generate_euclidean(seed, 14, 5, 2, 0.5)
        for k in range(1, 6):
            tour_split.splitour(christofides_tour(inst, inst.task_nodes).tour, k, inst)
    calls = tour_split.stats.calls
    slack = tour_split.stats.worst_slack
    ok = calls >= 1000 and slack >= -1e-9
    report(3, ok, f"{calls} splits checked this session, worst slack {slack:.3e}")


def all_pairings(points):
    if not points:
        yield []
        return
    first, rest = points[0], points[1:]
    for i, other in enumerate(rest):
        for tail in all_pairings(rest[:i] + rest[i + 1:]):
            yield [(first, other)] + tail


def test_criterion_4_christofides_quality(report):
    failures = []
    worst = 0.0
    for seed in range(250):
        n = 1 + seed % 11  # depot plus up to 11 tasks: at most 12 nodes
        inst = generate_euclidean(seed, n, 1, 1, 1.0)
        rep = christofides_tour(inst, inst.task_nodes)
        check_tour(inst, rep.tour, inst.task_nodes)
        opt = held_karp_tour(inst, inst.task_nodes).cost
        if opt > 0:  # a lone task sits on the centroid depot
            worst = max(worst, rep.tour.cost / opt)
        if rep.tour.cost > 1.5 * opt + 1e-9:
            failures.append(f"seed {seed}: {rep.tour.cost} > 1.5 * {opt}")

    rng = np.random.default_rng(2024)
    checked = 0
    for trial in range(100):
        size = 2 * (1 + trial % 5)  # 2..10 odd vertices
        pts = rng.random((size, 2))
        dist = np.sqrt(((pts[:, None] - pts[None]) ** 2).sum(-1))
        got = matching_weight(min_weight_perfect_matching(range(size), dist), dist)
        brute = min(sum(dist[a, b] for a, b in p) for p in all_pairings(list(range(size))))
        checked += 1
        if abs(got - brute) > 1e-12:
            failures.append(f"matching trial {trial}: {got} != {brute}")
    detail = f"250 tours, worst christofides/held-karp {worst:.4f}; {checked} matchings exact"
    report(4, not failures, "; ".join(failures[:5]) or detail)


def test_criterion_5_structural_invariants(report):
    failures = []
    instances = [small_instance(s) for s in range(120)]
    instances += [generate_example(w) for w in (1, 2, 3)]
    instances += [generate_example(4, k=k) for k in (2, 3)]
    for inst in instances:
        try:
            opt = exact_minmax(inst).minmax
            check_allocation(inst, naive_allocation(inst))
            allocs = [naive_allocation(inst), cycle_split(inst)]
            alloc, search = hetero_minmax_split(inst)
            allocs.append(alloc)
            for a in allocs[1:]:
                assert a.partition
                check_allocation(inst, a)
            for a in allocs:
                assert opt <= a.minmax + inst.tol(), f"oracle {opt} above {a.algorithm}"
            for p in search.probes:
                res = hetero_split(inst, p.lam)
                assert isinstance(res, Allocation) == p.feasible
                if p.feasible:
                    check_allocation(inst, res)
                    assert res.minmax <= p.lam + inst.tol(), "lambda exceeded"
        except AssertionError as exc:
            failures.append(f"{inst.name}: {exc}")
    report(5, not failures, "; ".join(failures[:5])
           or f"{len(instances)} instances: partitions, compatibility, lambda, oracle all hold")


def test_criterion_6_scale(report):
    inst = generate_euclidean(0, 200, 12, 4, 0.5)
    start = time.perf_counter()
    alloc, search = hetero_minmax_split(inst)
    elapsed = time.perf_counter() - start
    check_allocation(inst, alloc)
    ok = elapsed < 30.0 and len(search.probes) <= 60
    report(6, ok, f"200 tasks / 12 agents / 4 types in {elapsed:.2f}s, "
                  f"{len(search.probes)} probes, minmax {alloc.minmax:.4f}")
