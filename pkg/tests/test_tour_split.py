import itertools

import pytest
from hypothesis import given, strategies as st

from htap.instance import Tour, check_tour, generate_euclidean, generate_example
from htap.metric_tsp import christofides_tour
from htap.oracle import exact_minmax
from htap.tour_split import SplitBoundError, splitour, stats, thresholds


def bound_of(inst, tour, k):
    inner = tour.interior
    if not inner:
        return 0.0
    c_max = max(inst.distances[0, v] for v in inner)
    return (tour.cost - 2 * c_max) / k + 2 * c_max


def test_k1_identity():
    inst = generate_euclidean(1, 6, 1, 1, 1.0)
    tour = christofides_tour(inst, inst.task_nodes).tour
    res = splitour(tour, 1, inst)
    assert res.subtours == (tour,) and res.split_vertices == ()


def test_empty_tour():
    inst = generate_euclidean(1, 3, 1, 1, 1.0)
    res = splitour(Tour((0,), 0.0), 4, inst)
    assert len(res.subtours) == 4
    assert all(t.nodes == (0,) and t.cost == 0.0 for t in res.subtours)


def test_errors():
    inst = generate_euclidean(1, 3, 1, 1, 1.0)
    tour = christofides_tour(inst, inst.task_nodes).tour
    with pytest.raises(ValueError):
        splitour(tour, 0, inst)
    with pytest.raises(ValueError):
        splitour(Tour((1, 2, 1), 0.0), 2, inst)


def test_example1_generic_split():
    inst = generate_example(1, d=4, d_prime=3)
    tour = christofides_tour(inst, inst.generic_nodes).tour
    res = splitour(tour, 3, inst)
    assert [t.task_set for t in res.subtours] == [{1, 2}, {3, 4}, {5, 6}]
    assert res.L == 12.0 and res.c_max == 4.0
    assert res.bound == pytest.approx(4 / 3 + 8)


def test_threshold_tie_goes_to_earlier_piece():
    # Example 2 type tour: both tasks at prefix cost 1 == threshold 1
    inst = generate_example(2)
    tour = christofides_tour(inst, [1, 2]).tour
    res = splitour(tour, 2, inst)
    assert [t.task_set for t in res.subtours] == [{1, 2}, set()]


def test_thresholds_monotone():
    ts = thresholds(10.0, 2.0, 5)
    assert ts == sorted(ts) and len(ts) == 4


@pytest.mark.parametrize("seed", range(10))
def test_random_eight_node_tour_against_all_splits(seed):
    inst = generate_euclidean(seed, 8, 1, 1, 1.0)
    tour = christofides_tour(inst, inst.task_nodes).tour
    k = 3
    res = splitour(tour, k, inst)
    inner = tour.interior
    L = inst.tour_cost(tour.nodes)
    c_max = max(inst.distances[0, v] for v in inner)
    bound = (L - 2 * c_max) / k + 2 * c_max
    assert res.bound == pytest.approx(bound, abs=1e-12)

    # every contiguous placement of the two cut points
    best = float("inf")
    for a, b in itertools.combinations_with_replacement(range(len(inner) + 1), 2):
        pieces = [inner[:a], inner[a:b], inner[b:]]
        worst = max(Tour.from_nodes(inst, p).cost for p in pieces)
        best = min(best, worst)
    assert best <= res.max_cost + 1e-12
    assert res.max_cost <= bound + 1e-12


def test_five_halves_against_oracle():
    # single-type, single-depot: split ratio vs optimal min-max
    for seed in range(15):
        for k in (2, 3):
            inst = generate_euclidean(seed, 7, k, 1, 1.0)
            res = splitour(christofides_tour(inst, inst.task_nodes).tour, k, inst)
            opt = exact_minmax(inst).minmax
            assert res.max_cost <= (2.5 - 1 / k) * opt + 1e-9


def test_bound_violation_raises():
    inst = generate_euclidean(3, 5, 1, 1, 1.0)
    tour = christofides_tour(inst, inst.task_nodes).tour
    fake = Tour(tour.nodes, tour.cost * 0.01)  # understated L shrinks the bound
    with pytest.raises(SplitBoundError):
        splitour(fake, 3, inst)


@given(st.integers(0, 10**6), st.integers(1, 14), st.integers(1, 8))
def test_split_properties(seed, n, k):
    inst = generate_euclidean(seed, n, 1, 1, 1.0)
    tour = christofides_tour(inst, inst.task_nodes).tour
    before = stats.calls
    res = splitour(tour, k, inst)
    assert stats.calls == before + 1
    assert len(res.subtours) == k
    for sub in res.subtours:
        check_tour(inst, sub)
        assert sub.cost <= bound_of(inst, tour, k) + inst.tol()
    # pieces concatenate back to the tour, in order
    assert tuple(v for sub in res.subtours for v in sub.interior) == tour.interior
    cuts = list(res.split_vertices)
    assert cuts == sorted(cuts)
