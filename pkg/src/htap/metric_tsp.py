"""Depot-rooted TSP tours: Christofides construction and exact Held-Karp.

Tie-breaking is deterministic everywhere: equal-weight MST edges, equal-cost
pairings and Euler-walk choices all go to the lowest node index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

from .instance import DEPOT, Instance, Tour

BRUTE_FORCE_MATCHING_LIMIT = 12
EXACT_TSP_LIMIT = 15


class ExactLimitError(ValueError):
    """Raised when an exact routine is asked to solve more than its configured size."""


@dataclass(frozen=True)
class TourBuilderReport:
    tour: Tour
    mst_weight: float
    matching_weight: float
    odd_vertex_count: int
    method: str = "christofides"
    greedy_matching: bool = False  # True voids the 3/2 guarantee


# ---------------------------------------------------------------------------
# matching

def _pair_weight(dist, a, b) -> float:
    return float(dist[a][b])


def min_weight_perfect_matching(points: Sequence[int], dist) -> list[tuple[int, int]]:
    """Exact minimum-weight perfect matching on ``points`` under ``dist``.

    Small sets are solved by enumerating pairings (memoized on the remaining
    set; the lowest point is always paired first, so every pairing is seen
    exactly once).  Larger sets go to networkx's blossom implementation.
    """
    pts = sorted(int(p) for p in points)
    if len(pts) % 2:
        raise ValueError(f"perfect matching needs an even number of points, got {len(pts)}")
    if not pts:
        return []
    if len(pts) <= BRUTE_FORCE_MATCHING_LIMIT:
        return _enumerated_matching(pts, dist)
    g = nx.Graph()
    for i, a in enumerate(pts):
        for b in pts[i + 1:]:
            g.add_edge(a, b, weight=_pair_weight(dist, a, b))
    pairs = nx.min_weight_matching(g)
    return sorted(tuple(sorted((int(a), int(b)))) for a, b in pairs)


def _enumerated_matching(pts: list[int], dist) -> list[tuple[int, int]]:
    w = [[_pair_weight(dist, a, b) for b in pts] for a in pts]
    full = (1 << len(pts)) - 1

    @lru_cache(maxsize=None)
    def best(mask: int) -> tuple[float, tuple[tuple[int, int], ...]]:
        if mask == 0:
            return 0.0, ()
        i = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << i)
        out = (math.inf, ())
        j_mask = rest
        while j_mask:
            j = (j_mask & -j_mask).bit_length() - 1
            j_mask &= j_mask - 1
            sub_cost, sub_pairs = best(rest & ~(1 << j))
            cost = w[i][j] + sub_cost
            if cost < out[0]:
                out = (cost, ((i, j),) + sub_pairs)
        return out

    _, pairs = best(full)
    return sorted((pts[i], pts[j]) for i, j in pairs)


def greedy_matching(points: Sequence[int], dist) -> list[tuple[int, int]]:
    """Cheapest-edge-first pairing; fast but not optimal."""
    pts = sorted(int(p) for p in points)
    if len(pts) % 2:
        raise ValueError(f"perfect matching needs an even number of points, got {len(pts)}")
    edges = sorted((_pair_weight(dist, a, b), a, b)
                   for i, a in enumerate(pts) for b in pts[i + 1:])
    used: set[int] = set()
    pairs = []
    for _, a, b in edges:
        if a not in used and b not in used:
            used.update((a, b))
            pairs.append((a, b))
    return sorted(pairs)


def matching_weight(pairs: Iterable[tuple[int, int]], dist) -> float:
    return sum(_pair_weight(dist, a, b) for a, b in pairs)


# ---------------------------------------------------------------------------
# Christofides

def _prim(sub: np.ndarray) -> list[tuple[int, int]]:
    n = sub.shape[0]
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    key = sub[0].copy()
    parent = np.zeros(n, dtype=int)
    edges = []
    for _ in range(n - 1):
        v = int(np.argmin(np.where(in_tree, np.inf, key)))
        edges.append((int(parent[v]), v))
        in_tree[v] = True
        closer = ~in_tree & (sub[v] < key)
        key[closer] = sub[v][closer]
        parent[closer] = v
    return edges


def _euler_circuit(n: int, edges: list[tuple[int, int]], start: int = 0) -> list[int]:
    """Hierholzer on a connected multigraph with all degrees even."""
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for eid, (a, b) in enumerate(edges):
        adj[a].append((b, eid))
        adj[b].append((a, eid))
    for lst in adj:
        lst.sort()
    used = [False] * len(edges)
    ptr = [0] * n
    stack = [start]
    circuit = []
    while stack:
        v = stack[-1]
        while ptr[v] < len(adj[v]) and used[adj[v][ptr[v]][1]]:
            ptr[v] += 1
        if ptr[v] == len(adj[v]):
            circuit.append(stack.pop())
        else:
            u, eid = adj[v][ptr[v]]
            used[eid] = True
            stack.append(u)
    circuit.reverse()
    return circuit


def _colocated_groups(inst: Instance, nodes: list[int]) -> tuple[list[int], dict[int, list[int]]]:
    """Group nodes at distance exactly 0 under the lowest-index member.

    Returns the representatives (depot first) and each representative's
    members in index order.
    """
    reps: list[int] = []
    members: dict[int, list[int]] = {}
    dist = inst.distances
    for v in nodes:
        for r in reps:
            if dist[r, v] == 0.0:
                members[r].append(v)
                break
        else:
            reps.append(v)
            members[v] = [v]
    return reps, members


def christofides_tour(inst: Instance, subset: Iterable[int], *,
                      greedy: bool = False) -> TourBuilderReport:
    """Christofides tour through the depot and ``subset`` (task nodes).

    Co-located tasks (distance 0) are collapsed before the construction and
    visited back to back in the result; tasks sitting on the depot come first.
    """
    tasks = sorted(set(int(v) for v in subset) - {DEPOT})
    if not tasks:
        return TourBuilderReport(Tour((DEPOT,), 0.0), 0.0, 0.0, 0, greedy_matching=greedy)
    nodes, members = _colocated_groups(inst, [DEPOT] + tasks)
    if len(nodes) == 1:
        tour = Tour.from_nodes(inst, members[DEPOT][1:])
        return TourBuilderReport(tour, 0.0, 0.0, 0, greedy_matching=greedy)
    sub = inst.distances[np.ix_(nodes, nodes)]
    mst = _prim(sub)
    degree = np.zeros(len(nodes), dtype=int)
    for a, b in mst:
        degree[a] += 1
        degree[b] += 1
    odd = [int(i) for i in np.flatnonzero(degree % 2)]
    pairs = (greedy_matching if greedy else min_weight_perfect_matching)(odd, sub)
    circuit = _euler_circuit(len(nodes), mst + pairs)

    seen: set[int] = set()
    order = []
    for pos in circuit:
        if pos not in seen:
            seen.add(pos)
            order.append(pos)
    assert order[0] == 0
    interior = members[DEPOT][1:]
    for p in order[1:]:
        interior.extend(members[nodes[p]])
    tour = Tour.from_nodes(inst, interior)
    return TourBuilderReport(
        tour=tour,
        mst_weight=float(sum(sub[a, b] for a, b in mst)),
        matching_weight=matching_weight(pairs, sub),
        odd_vertex_count=len(odd),
        greedy_matching=greedy,
    )


class TourCache:
    """Christofides tours memoized by task set (the cost depends only on the set)."""

    def __init__(self, inst: Instance, greedy: bool = False):
        self.inst = inst
        self.greedy = greedy
        self._tours: dict[frozenset[int], Tour] = {}
        self.hits = 0
        self.misses = 0

    def tour(self, tasks: Iterable[int]) -> Tour:
        key = frozenset(tasks)
        hit = self._tours.get(key)
        if hit is not None:
            self.hits += 1
            return hit
        self.misses += 1
        tour = christofides_tour(self.inst, key, greedy=self.greedy).tour
        self._tours[key] = tour
        return tour

    def cost(self, tasks: Iterable[int]) -> float:
        return self.tour(tasks).cost


# ---------------------------------------------------------------------------
# Held-Karp

def _held_karp_table(sub: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """DP over subsets of the non-depot positions 1..n of ``sub``.

    ``dp[mask, j]`` is the cheapest depot-rooted path visiting exactly
    ``mask`` (bit j = position j + 1) and ending at position j + 1.
    """
    n = sub.shape[0] - 1
    size = 1 << n
    dp = np.full((size, n), np.inf)
    parent = np.full((size, n), -1, dtype=np.int64)
    if n == 0:
        return dp, parent
    masks = np.arange(size, dtype=np.int64)
    pop = np.zeros(size, dtype=np.int64)
    for j in range(n):
        pop += (masks >> j) & 1
    for j in range(n):
        dp[1 << j, j] = sub[0, j + 1]
    step = sub[1:, 1:]
    for s in range(2, n + 1):
        layer = masks[pop == s]
        for j in range(n):
            ms = layer[(layer >> j) & 1 == 1]
            prev = ms ^ (1 << j)
            vals = dp[prev] + step[:, j][None, :]
            best = np.argmin(vals, axis=1)
            dp[ms, j] = vals[np.arange(len(ms)), best]
            parent[ms, j] = best
    return dp, parent


def subset_tour_costs(inst: Instance, nodes: Sequence[int]) -> np.ndarray:
    """Optimal tour cost C*(S) for every subset S of ``nodes``.

    Entry ``mask`` of the result corresponds to ``{nodes[i] : bit i set}``.
    """
    nodes = list(nodes)
    if len(nodes) > 20:
        raise ExactLimitError(f"{len(nodes)} nodes is too many for a subset table")
    order = [DEPOT] + nodes
    sub = inst.distances[np.ix_(order, order)]
    dp, _ = _held_karp_table(sub)
    costs = np.zeros(1 << len(nodes))
    if nodes:
        costs[1:] = (dp[1:] + sub[1:, 0][None, :]).min(axis=1)
    return costs


def held_karp_tour(inst: Instance, subset: Iterable[int], limit: int = EXACT_TSP_LIMIT) -> Tour:
    """Optimal tour through the depot and ``subset``."""
    nodes = sorted(set(int(v) for v in subset) - {DEPOT})
    if len(nodes) > limit:
        raise ExactLimitError(f"held_karp_tour: {len(nodes)} tasks exceeds the limit of {limit}")
    if not nodes:
        return Tour((DEPOT,), 0.0)
    order = [DEPOT] + nodes
    sub = inst.distances[np.ix_(order, order)]
    dp, parent = _held_karp_table(sub)
    full = (1 << len(nodes)) - 1
    closing = dp[full] + sub[1:, 0]
    j = int(np.argmin(closing))
    path = []
    mask = full
    while j >= 0:
        path.append(nodes[j])
        prev = int(parent[mask, j])
        mask ^= 1 << j
        j = prev
    path.reverse()
    return Tour.from_nodes(inst, path)
