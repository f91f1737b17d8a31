"""Exact min-max allocation for small instances, by enumeration."""

from __future__ import annotations

import os
import time
from dataclasses import dataclass

import numpy as np

from .instance import GENERIC, AgentPlan, Allocation, Instance
from .metric_tsp import ExactLimitError, held_karp_tour, subset_tour_costs

DEFAULT_MAX_TASKS = 9
DEFAULT_MAX_AGENTS = 3


def default_max_tasks() -> int:
    return int(os.environ.get("HTAP_EXACT_LIMIT", DEFAULT_MAX_TASKS))


@dataclass(frozen=True)
class ExactResult:
    allocation: Allocation
    minmax: float
    partitions_examined: int
    elapsed: float  # seconds


def _canonical_rows(assign: np.ndarray, groups: list[list[int]], n_tasks: int) -> np.ndarray:
    """Keep one representative per relabeling of interchangeable agents.

    Within a group of same-type agents, agent r may appear only after agent
    r - 1 has (first-appearance order follows agent order), and unused
    agents come last.
    """
    keep = np.ones(len(assign), dtype=bool)
    if n_tasks == 0:
        return keep
    for group in groups:
        if len(group) < 2:
            continue
        firsts = []
        for r, a in enumerate(group):
            hit = assign == a
            first = np.where(hit.any(axis=1), hit.argmax(axis=1), n_tasks + r)
            firsts.append(first)
        for prev, cur in zip(firsts, firsts[1:]):
            keep &= prev < cur
    return keep


def exact_minmax(inst: Instance, max_tasks: int | None = None,
                 max_agents: int = DEFAULT_MAX_AGENTS) -> ExactResult:
    """Optimal min-max allocation: every type-i task goes to some type-i
    agent, every generic task to any agent, each set toured optimally."""
    if max_tasks is None:
        max_tasks = default_max_tasks()
    if inst.n_tasks > max_tasks:
        raise ExactLimitError(f"oracle: {inst.n_tasks} tasks exceeds max_tasks={max_tasks}")
    if inst.k > max_agents:
        raise ExactLimitError(f"oracle: {inst.k} agents exceeds max_agents={max_agents}")

    start = time.perf_counter()
    nodes = list(inst.task_nodes)
    costs = subset_tour_costs(inst, nodes)
    agents = inst.agents_sorted()
    n, k = len(nodes), len(agents)

    choices = []
    for v in nodes:
        typ = inst.node_type(v)
        choices.append(np.array([a for a in range(k) if typ == GENERIC or agents[a].type == typ]))
    shape = tuple(len(c) for c in choices)
    if any(s == 0 for s in shape):
        raise ValueError("a task has no compatible agent")
    grid = np.indices(shape).reshape(n, -1).T if n else np.zeros((1, 0), dtype=int)
    assign = np.empty_like(grid)
    for i in range(n):
        assign[:, i] = choices[i][grid[:, i]]

    groups = [[a for a in range(k) if agents[a].type == t] for t in inst.agent_types]
    assign = assign[_canonical_rows(assign, groups, n)]

    bits = (1 << np.arange(n, dtype=np.int64))
    masks = np.stack([((assign == a) * bits).sum(axis=1) for a in range(k)], axis=1)
    worst = costs[masks].max(axis=1)
    row = int(np.argmin(worst))

    plans = []
    for a, agent in enumerate(agents):
        tasks = frozenset(nodes[i] for i in range(n) if assign[row, i] == a)
        spec = frozenset(v for v in tasks if inst.node_type(v) != GENERIC)
        plans.append(AgentPlan(agent.id, spec, tasks - spec, held_karp_tour(inst, tasks, limit=max(n, 1))))
    alloc = Allocation("exact", tuple(plans))
    return ExactResult(alloc, alloc.minmax, len(assign), time.perf_counter() - start)
