"""Splitting a depot-rooted tour into k consecutive subtours (SPLITOUR)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .instance import DEPOT, Instance, Tour


class SplitBoundError(AssertionError):
    """A subtour exceeded (1/k)(L - 2 c_max) + 2 c_max.  Never expected on metric input."""


@dataclass(frozen=True)
class SplitResult:
    subtours: tuple[Tour, ...]
    L: float
    c_max: float
    bound: float
    split_vertices: tuple[int, ...]  # p(1..k-1) as 1-based positions along the tour interior

    @property
    def max_cost(self) -> float:
        return max(t.cost for t in self.subtours)


@dataclass
class SplitStats:
    calls: int = 0
    worst_slack: float = float("inf")  # min over calls of bound - max subtour cost


stats = SplitStats()


def thresholds(L: float, c_max: float, k: int) -> list[float]:
    """Prefix-cost cut-offs (j/k)(L - 2 c_max) + c_max for j = 1..k-1."""
    return [j / k * (L - 2 * c_max) + c_max for j in range(1, k)]


def splitour(tour: Tour, k: int, inst: Instance) -> SplitResult:
    """Cut ``tour`` into exactly ``k`` subtours.

    For each j the cut lands after the last vertex whose cost along the tour
    from the depot is at most the j-th threshold; a vertex sitting exactly on
    a threshold stays in the earlier piece.  Pieces may be empty.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    nodes = tour.nodes
    if nodes[0] != DEPOT or nodes[-1] != DEPOT:
        raise ValueError(f"tour is not rooted at the depot: {nodes}")

    dist = inst.distances
    inner = list(tour.interior)
    n = len(inner)
    if n == 0:
        empty = Tour((DEPOT,), 0.0)
        result = SplitResult((empty,) * k, 0.0, 0.0, 0.0, (0,) * (k - 1))
        _record(result, inst)
        return result

    L = tour.cost
    c_max = float(dist[DEPOT, inner].max())
    path = [DEPOT] + inner
    # prefix[i] = cost along the tour from the depot to inner[i - 1]; prefix[0] = 0
    prefix = np.concatenate([[0.0], np.cumsum(dist[path[:-1], path[1:]])])

    cuts = [int(np.searchsorted(prefix[1:], t, side="right")) for t in thresholds(L, c_max, k)]
    # L may sit a rounding error below 2 c_max, making thresholds decrease
    cuts = [int(c) for c in np.maximum.accumulate(cuts)] if cuts else []
    bounds = [0] + cuts + [n]
    subtours = tuple(Tour.from_nodes(inst, inner[bounds[j]:bounds[j + 1]]) for j in range(k))
    bound = (L - 2 * c_max) / k + 2 * c_max
    result = SplitResult(subtours, L, c_max, bound, tuple(cuts))
    _record(result, inst)
    return result


def _record(result: SplitResult, inst: Instance) -> None:
    stats.calls += 1
    slack = result.bound - result.max_cost
    stats.worst_slack = min(stats.worst_slack, slack)
    if slack < -inst.tol():
        raise SplitBoundError(
            f"subtour cost {result.max_cost!r} exceeds split bound {result.bound!r}")
