"""Allocation algorithms: NaiveAllocation, CycleSplit, HeteroSplit and
HeteroMinMaxSplit (binary search over the per-agent budget lambda)."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .instance import GENERIC, AgentPlan, Allocation, Instance, Tour
from .metric_tsp import TourCache
from .tour_split import splitour

log = logging.getLogger(__name__)

ALGORITHMS = ("naive", "cyclesplit", "heterominmax")


@dataclass(frozen=True)
class Infeasible:
    """HeteroSplit verdict when no allocation within lambda was found."""

    lam: float
    reason: str
    blocking_task: int | None = None
    agent_costs: dict[int, float] = field(default_factory=dict)


@dataclass(frozen=True)
class Probe:
    lam: float
    feasible: bool
    minmax: float | None = None
    guard_fired: tuple[int, ...] = ()  # types whose Phase-3 rebalance was rolled back


@dataclass
class LambdaSearch:
    lo: float
    hi: float  # initial upper end, before any doubling
    tolerance: float
    probes: list[Probe] = field(default_factory=list)
    result_lambda: float | None = None
    hi_final: float | None = None
    best_infeasible: float | None = None
    expansions: int = 0

    def to_dict(self) -> dict:
        return {
            "lo": self.lo, "hi": self.hi, "hi_final": self.hi_final,
            "tolerance": self.tolerance, "expansions": self.expansions,
            "result_lambda": self.result_lambda, "best_infeasible": self.best_infeasible,
            "probes": [{"lambda": p.lam, "feasible": p.feasible, "minmax": p.minmax,
                        "guard_fired": p.guard_fired}
                       for p in self.probes],
        }


class LambdaSearchError(RuntimeError):
    def __init__(self, message: str, search: LambdaSearch):
        super().__init__(message)
        self.search = search


def _cache(inst: Instance, cache: TourCache | None, greedy: bool) -> TourCache:
    if cache is None:
        return TourCache(inst, greedy=greedy)
    if cache.inst is not inst:
        raise ValueError("tour cache belongs to another instance")
    return cache


def naive_allocation(inst: Instance, *, greedy: bool = False) -> Allocation:
    """Agent with the lowest id tours everything; every other agent tours its
    own type's tasks.  Not a partition: type tasks appear twice."""
    cache = TourCache(inst, greedy=greedy)
    agents = inst.agents_sorted()
    everything = frozenset(inst.task_nodes)
    generic = frozenset(inst.generic_nodes)
    plans = [AgentPlan(agents[0].id, everything - generic, generic, cache.tour(everything))]
    for a in agents[1:]:
        own = frozenset(inst.nodes_of_type(a.type))
        plans.append(AgentPlan(a.id, own, frozenset(), cache.tour(own)))
    return Allocation("naive", tuple(plans), partition=False)


def _type_phase(inst: Instance, cache: TourCache) -> dict[int, Tour]:
    """Split a Christofides tour on each T_i among the type-i agents (id order)."""
    out = {}
    for type_id in inst.agent_types:
        group = inst.agents_of_type(type_id)
        split = splitour(cache.tour(inst.nodes_of_type(type_id)), len(group), inst)
        for agent, sub in zip(group, split.subtours):
            out[agent.id] = sub
    return out


def cycle_split(inst: Instance, *, greedy: bool = False, cache: TourCache | None = None) -> Allocation:
    cache = _cache(inst, cache, greedy)
    specific = _type_phase(inst, cache)
    agents = inst.agents_sorted()
    generic_split = splitour(cache.tour(inst.generic_nodes), len(agents), inst)
    plans = []
    for agent, sub in zip(agents, generic_split.subtours):
        v_j = specific[agent.id].task_set
        r_j = sub.task_set
        plans.append(AgentPlan(agent.id, v_j, r_j, cache.tour(v_j | r_j)))
    return Allocation("cyclesplit", tuple(plans))


def hetero_split(inst: Instance, lam: float, *, greedy: bool = False,
                 cache: TourCache | None = None) -> Allocation | Infeasible:
    """Allocate within budget ``lam`` or report why that failed.

    Phase 1 splits type tasks exactly as cycle_split does.  Phase 2 walks
    the Christofides tour on the generic tasks: the cheapest free agent takes
    the next task and keeps taking tasks along the tour while its recomputed
    Christofides cost stays within ``lam``.  Phase 3 pools each type's tasks
    and re-splits them, unless that raises the type's worst tour.
    """
    cache = _cache(inst, cache, greedy)
    eps = inst.tol()
    agents = inst.agents_sorted()
    tours = _type_phase(inst, cache)
    specific = {a.id: tours[a.id].task_set for a in agents}
    generic: dict[int, frozenset[int]] = {a.id: frozenset() for a in agents}

    over = {aid: t.cost for aid, t in tours.items() if t.cost > lam + eps}
    if over:
        return Infeasible(lam, "type-specific subtour exceeds lambda", None, over)

    # Phase 2
    walk = cache.tour(inst.generic_nodes).interior
    free = [a.id for a in agents]
    pos = 0
    while pos < len(walk) and free:
        t = walk[pos]
        costs = {aid: cache.cost(specific[aid] | {t}) for aid in free}
        chosen = min(free, key=lambda aid: (costs[aid], aid))
        if costs[chosen] > lam + eps:
            return Infeasible(lam, "no free agent can take the next generic task", t, costs)
        taken = {t}
        pos += 1
        while pos < len(walk):
            nxt = walk[pos]
            if cache.cost(specific[chosen] | taken | {nxt}) > lam + eps:
                break
            taken.add(nxt)
            pos += 1
        generic[chosen] = frozenset(taken)
        tours[chosen] = cache.tour(specific[chosen] | generic[chosen])
        free.remove(chosen)
    if pos < len(walk):
        return Infeasible(lam, "generic tasks remain but no free agent is left", walk[pos])

    # Phase 3
    guard = []
    for type_id in inst.agent_types:
        group = [a.id for a in inst.agents_of_type(type_id)]
        before = max(tours[aid].cost for aid in group)
        pool = frozenset().union(*(specific[aid] | generic[aid] for aid in group))
        split = splitour(cache.tour(pool), len(group), inst)
        if split.max_cost > before + eps:
            guard.append(type_id)
            log.info("phase-3 rebalance for type %d rolled back (%.6g > %.6g) at lambda=%.6g",
                     type_id, split.max_cost, before, lam)
            continue
        for aid, sub in zip(group, split.subtours):
            nodes = sub.task_set
            specific[aid] = frozenset(v for v in nodes if inst.node_type(v) != GENERIC)
            generic[aid] = nodes - specific[aid]
            tours[aid] = sub

    plans = tuple(AgentPlan(a.id, specific[a.id], generic[a.id], tours[a.id]) for a in agents)
    notes = tuple(f"phase3-guard:type{t}" for t in guard)
    return Allocation("heterosplit", plans, notes=notes)


def search_window(inst: Instance, cache: TourCache) -> tuple[float, float]:
    """[2 max_t d(depot, t), max_i C(T_i) + C(T_0)] with C the Christofides cost."""
    tasks = inst.task_nodes
    lo = 2.0 * float(inst.distances[0, list(tasks)].max()) if tasks else 0.0
    hi = max(cache.cost(inst.nodes_of_type(i)) for i in inst.agent_types)
    hi += cache.cost(inst.generic_nodes)
    return lo, hi


def hetero_minmax_split(inst: Instance, *, tolerance: float | None = None, rel_tol: float = 1e-6,
                        max_expansions: int = 8, greedy: bool = False,
                        cache: TourCache | None = None) -> tuple[Allocation, LambdaSearch]:
    """Binary search for the smallest lambda at which hetero_split succeeds.

    The lower end is probed first.  If the upper end fails it is doubled, at
    most ``max_expansions`` times.  Every feasible probe is kept and the one
    with the lowest min-max cost is returned (ties: smaller lambda), so the
    answer never relies on feasibility being monotone in lambda.
    """
    cache = _cache(inst, cache, greedy)
    lo, hi = search_window(inst, cache)
    if tolerance is None:
        tolerance = rel_tol * hi if hi > 0 else rel_tol
    search = LambdaSearch(lo=lo, hi=hi, tolerance=tolerance)
    best: tuple[float, float, Allocation] | None = None

    def probe(lam: float) -> bool:
        nonlocal best
        res = hetero_split(inst, lam, cache=cache)
        if isinstance(res, Infeasible):
            search.probes.append(Probe(lam, False))
            return False
        guard = tuple(int(n.rsplit("type", 1)[1]) for n in res.notes)
        search.probes.append(Probe(lam, True, res.minmax, guard))
        if best is None or (res.minmax, lam) < (best[0], best[1]):
            best = (res.minmax, lam, res)
        return True

    eps = inst.tol()
    if probe(lo):
        search.hi_final = lo
    else:
        bad = lo
        while not probe(hi):
            bad = max(bad, hi)
            if search.expansions == max_expansions:
                search.best_infeasible = bad
                search.hi_final = hi
                raise LambdaSearchError(
                    f"hetero_split infeasible even at lambda={hi:g} after "
                    f"{max_expansions} doublings", search)
            hi *= 2.0
            search.expansions += 1
        while hi - bad > tolerance:
            # nothing can beat the lower bound, so a feasible cost at lo ends the search
            if best[0] <= lo + eps:
                break
            mid = 0.5 * (bad + hi)
            if probe(mid):
                hi = mid
            else:
                bad = mid
        search.best_infeasible = bad
        search.hi_final = hi

    minmax, lam, alloc = best
    search.result_lambda = lam
    alloc = Allocation("heterominmax", alloc.plans, alloc.partition, alloc.notes)
    return alloc, search


def solve(inst: Instance, algorithm: str, **kw) -> Allocation:
    if algorithm == "naive":
        return naive_allocation(inst, **kw)
    if algorithm == "cyclesplit":
        return cycle_split(inst, **kw)
    if algorithm == "heterominmax":
        return hetero_minmax_split(inst, **kw)[0]
    raise ValueError(f"unknown algorithm {algorithm!r}")
