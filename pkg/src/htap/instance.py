"""Problem instances: typed tasks, typed agents and a metric over depot + tasks.

Node indexing used throughout the package: node 0 is the depot, task ``i``
in listed order lives at node ``i + 1``.  Algorithms work on node indices;
task ids only appear at the serialization boundary.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

GENERIC = 0
DEPOT = 0


class InstanceError(ValueError):
    """Raised when an instance file cannot be parsed or fails validation."""


@dataclass(frozen=True)
class Task:
    id: int
    type: int
    x: float | None = None
    y: float | None = None


@dataclass(frozen=True)
class Agent:
    id: int
    type: int


@dataclass(frozen=True)
class Violation:
    kind: str  # shape | diagonal | negative | symmetry | triangle | ids | orphan | agents
    nodes: tuple[int, ...] = ()
    magnitude: float = 0.0
    message: str = ""

    def __str__(self) -> str:
        return self.message or f"{self.kind} violation at {self.nodes} ({self.magnitude:g})"


@dataclass(frozen=True, eq=False)
class Instance:
    name: str
    tasks: tuple[Task, ...]
    agents: tuple[Agent, ...]
    distances: np.ndarray
    depot_xy: tuple[float, float] | None = None
    depot: int = field(default=DEPOT, init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "tasks", tuple(self.tasks))
        object.__setattr__(self, "agents", tuple(self.agents))
        dist = np.array(self.distances, dtype=np.float64)
        dist.setflags(write=False)
        object.__setattr__(self, "distances", dist)

    # -- basic shape ------------------------------------------------------
    @property
    def n_tasks(self) -> int:
        return len(self.tasks)

    @property
    def k(self) -> int:
        return len(self.agents)

    @property
    def task_nodes(self) -> tuple[int, ...]:
        return tuple(range(1, self.n_tasks + 1))

    def task_of(self, node: int) -> Task:
        return self.tasks[node - 1]

    def node_type(self, node: int) -> int:
        return self.tasks[node - 1].type

    # -- typing -----------------------------------------------------------
    @property
    def agent_types(self) -> tuple[int, ...]:
        """Distinct agent types, ascending."""
        return tuple(sorted({a.type for a in self.agents}))

    @property
    def m(self) -> int:
        return len(self.agent_types)

    def agents_sorted(self) -> list[Agent]:
        return sorted(self.agents, key=lambda a: a.id)

    def agents_of_type(self, type_id: int) -> list[Agent]:
        return [a for a in self.agents_sorted() if a.type == type_id]

    def m_i(self, type_id: int) -> int:
        return sum(1 for a in self.agents if a.type == type_id)

    def nodes_of_type(self, type_id: int) -> tuple[int, ...]:
        return tuple(i + 1 for i, t in enumerate(self.tasks) if t.type == type_id)

    @property
    def generic_nodes(self) -> tuple[int, ...]:
        return self.nodes_of_type(GENERIC)

    def tol(self) -> float:
        """Absolute tolerance for cost comparisons: 1e-9 scaled by the largest distance."""
        scale = float(self.distances.max()) if self.distances.size else 0.0
        return 1e-9 * max(scale, 1.0)

    def tour_cost(self, nodes: Sequence[int]) -> float:
        if len(nodes) < 2:
            return 0.0
        idx = np.asarray(nodes)
        return float(self.distances[idx[:-1], idx[1:]].sum())

    def task_ids(self, nodes: Iterable[int]) -> list[int]:
        return [self.tasks[v - 1].id for v in nodes]

    # -- serialization ----------------------------------------------------
    def has_coordinates(self) -> bool:
        return self.n_tasks > 0 and all(t.x is not None and t.y is not None for t in self.tasks)

    def to_dict(self) -> dict:
        data: dict = {"name": self.name}
        coords = self.has_coordinates() and self.depot_xy is not None
        if coords:
            data["depot"] = {"x": self.depot_xy[0], "y": self.depot_xy[1]}
        tasks = []
        for t in self.tasks:
            entry: dict = {"id": t.id, "type": t.type}
            if coords:
                entry["x"] = t.x
                entry["y"] = t.y
            tasks.append(entry)
        data["tasks"] = tasks
        data["agents"] = [{"id": a.id, "type": a.type} for a in self.agents]
        if not coords:
            data["distances"] = self.distances.tolist()
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")


# ---------------------------------------------------------------------------
# tours and allocations

@dataclass(frozen=True)
class Tour:
    """Closed walk ``depot, v1, ..., vr, depot``; an empty tour is ``(depot,)``."""

    nodes: tuple[int, ...]
    cost: float

    @classmethod
    def from_nodes(cls, inst: Instance, interior: Sequence[int]) -> "Tour":
        interior = tuple(int(v) for v in interior)
        if not interior:
            return cls((DEPOT,), 0.0)
        nodes = (DEPOT,) + interior + (DEPOT,)
        return cls(nodes, inst.tour_cost(nodes))

    @property
    def interior(self) -> tuple[int, ...]:
        return self.nodes[1:-1]

    @property
    def task_set(self) -> frozenset[int]:
        return frozenset(self.interior)


def check_tour(inst: Instance, tour: Tour, expected: Iterable[int] | None = None) -> None:
    """Raise AssertionError if ``tour`` breaks a Tour invariant."""
    nodes = tour.nodes
    assert nodes[0] == DEPOT and nodes[-1] == DEPOT, f"tour not rooted at depot: {nodes}"
    if len(nodes) == 1:
        assert tour.cost == 0.0
    else:
        assert len(nodes) >= 3, f"degenerate tour {nodes}"
    inner = tour.interior
    assert DEPOT not in inner and len(set(inner)) == len(inner), f"repeated node in {nodes}"
    recomputed = inst.tour_cost(nodes)
    assert abs(recomputed - tour.cost) <= 1e-9 * max(abs(recomputed), 1.0), (recomputed, tour.cost)
    if expected is not None:
        assert set(inner) == set(expected), f"tour visits {sorted(inner)}, expected {sorted(expected)}"


@dataclass(frozen=True)
class AgentPlan:
    agent_id: int
    specific: frozenset[int]  # type-specific task nodes (V_j)
    generic: frozenset[int]  # generic task nodes (R_j)
    tour: Tour

    @property
    def tasks(self) -> frozenset[int]:
        return self.specific | self.generic

    @property
    def cost(self) -> float:
        return self.tour.cost


@dataclass(frozen=True)
class Allocation:
    algorithm: str
    plans: tuple[AgentPlan, ...]
    partition: bool = True
    notes: tuple[str, ...] = ()

    @property
    def minmax(self) -> float:
        return max((p.cost for p in self.plans), default=0.0)

    def plan(self, agent_id: int) -> AgentPlan:
        for p in self.plans:
            if p.agent_id == agent_id:
                return p
        raise KeyError(agent_id)

    def sets(self) -> dict[int, frozenset[int]]:
        return {p.agent_id: p.tasks for p in self.plans}

    def to_dict(self, inst: Instance) -> dict:
        return {
            "algorithm": self.algorithm,
            "minmax": self.minmax,
            "partition": self.partition,
            "agents": [{"id": p.agent_id,
                        "tasks": sorted(inst.task_ids(p.tasks)),
                        "tour": inst.task_ids(p.tour.interior),
                        "cost": p.cost} for p in self.plans],
        }


def check_allocation(inst: Instance, alloc: Allocation) -> None:
    """Raise AssertionError unless ``alloc`` is a compatible exact partition
    (partition checks are skipped for allocations flagged non-partition)."""
    types = {a.id: a.type for a in inst.agents}
    assert sorted(p.agent_id for p in alloc.plans) == sorted(types), "one plan per agent"
    for p in alloc.plans:
        check_tour(inst, p.tour, p.tasks)
        if alloc.partition:
            assert all(inst.node_type(v) == types[p.agent_id] for v in p.specific), \
                f"agent {p.agent_id} holds incompatible type tasks"
            assert all(inst.node_type(v) == GENERIC for v in p.generic), \
                f"agent {p.agent_id} holds non-generic tasks in R_j"
    covered = [v for p in alloc.plans for v in p.tasks]
    assert set(covered) == set(inst.task_nodes), "tasks left unallocated"
    if alloc.partition:
        assert len(covered) == inst.n_tasks, "task allocated to more than one agent"


# ---------------------------------------------------------------------------
# distances

def euclidean_matrix(points: np.ndarray) -> np.ndarray:
    points = np.asarray(points, dtype=np.float64)
    diff = points[:, None, :] - points[None, :, :]
    return np.sqrt((diff**2).sum(axis=-1))


def metric_closure(weights: np.ndarray) -> np.ndarray:
    """All-pairs shortest paths of a weighted graph given as a matrix.

    ``np.inf`` marks a missing edge.  Floyd-Warshall passes are repeated
    until nothing changes so the result satisfies the triangle inequality
    exactly in floating point, not just up to rounding.
    """
    dist = np.array(weights, dtype=np.float64)
    if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
        raise ValueError("weights must be a square matrix")
    if (dist < 0).any():
        raise ValueError("negative edge weight")
    np.fill_diagonal(dist, 0.0)
    n = dist.shape[0]
    while True:
        before = dist.copy()
        for v in range(n):
            np.minimum(dist, dist[:, v, None] + dist[None, v, :], out=dist)
        if np.array_equal(before, dist):
            break
    if np.isinf(dist).any():
        raise ValueError("graph is not connected")
    return dist


# ---------------------------------------------------------------------------
# validation

def validate_metric(inst: Instance, eps: float | None = None) -> list[Violation]:
    """Check every instance invariant; returns the violations (empty when valid).

    Triangle violations are reported once per unordered pair ``(u, w)`` with
    the intermediate node ``v`` giving the largest excess.
    """
    out: list[Violation] = []
    dist = inst.distances
    n = inst.n_tasks + 1

    if dist.shape != (n, n):
        return [Violation("shape", (), 0.0,
                          f"distance matrix has shape {dist.shape}, expected {(n, n)}")]
    if not np.isfinite(dist).all():
        out.append(Violation("negative", (), float("nan"), "distance matrix has non-finite entries"))
        return out
    if eps is None:
        eps = 1e-9 * max(float(np.abs(dist).max()) if dist.size else 0.0, 1.0)

    for u in np.flatnonzero(np.diag(dist) != 0):
        out.append(Violation("diagonal", (int(u),), float(dist[u, u]),
                             f"distances[{u}][{u}] = {dist[u, u]:g}, expected 0"))
    for u, v in zip(*np.nonzero(dist < 0)):
        out.append(Violation("negative", (int(u), int(v)), float(dist[u, v]),
                             f"negative distance distances[{u}][{v}] = {dist[u, v]:g}"))
    asym = np.abs(dist - dist.T)
    for u, v in zip(*np.nonzero(np.triu(asym > 0, 1))):
        out.append(Violation("symmetry", (int(u), int(v)), float(asym[u, v]),
                             f"asymmetric distances: [{u}][{v}] = {dist[u, v]:g} "
                             f"but [{v}][{u}] = {dist[v, u]:g}"))

    # worst excess d(u,w) - d(u,v) - d(v,w) over v, for every pair
    worst = np.full((n, n), -np.inf)
    witness = np.zeros((n, n), dtype=int)
    for v in range(n):
        excess = dist - (dist[:, v, None] + dist[None, v, :])
        better = excess > worst
        worst[better] = excess[better]
        witness[better] = v
    bad = np.triu(worst > eps, 1)
    for u, w in zip(*np.nonzero(bad)):
        v = int(witness[u, w])
        out.append(Violation("triangle", (int(u), v, int(w)), float(worst[u, w]),
                             f"triangle inequality fails for ({u}, {v}, {w}): "
                             f"d({u},{w}) exceeds d({u},{v}) + d({v},{w}) by {worst[u, w]:g}"))

    out.extend(_structural_violations(inst))
    return out


def _structural_violations(inst: Instance) -> list[Violation]:
    out = []
    if inst.k < 1:
        out.append(Violation("agents", (), 0.0, "instance has no agents"))
    task_ids = [t.id for t in inst.tasks]
    agent_ids = [a.id for a in inst.agents]
    if len(set(task_ids)) != len(task_ids):
        out.append(Violation("ids", (), 0.0, "duplicate task ids"))
    if len(set(agent_ids)) != len(agent_ids):
        out.append(Violation("ids", (), 0.0, "duplicate agent ids"))
    if any(i < 0 for i in task_ids + agent_ids):
        out.append(Violation("ids", (), 0.0, "ids must be non-negative"))
    for a in inst.agents:
        if a.type < 1:
            out.append(Violation("agents", (), float(a.type),
                                 f"agent {a.id} has type {a.type}; agent types start at 1"))
    have = set(inst.agent_types)
    for node, t in enumerate(inst.tasks, start=1):
        if t.type < 0:
            out.append(Violation("orphan", (node,), float(t.type),
                                 f"task {t.id} has negative type {t.type}"))
        elif t.type != GENERIC and t.type not in have:
            out.append(Violation("orphan", (node,), float(t.type),
                                 f"task {t.id} has type {t.type} but no agent of that type exists"))
    return out


# ---------------------------------------------------------------------------
# loading

def instance_from_dict(data: dict) -> Instance:
    try:
        name = str(data.get("name", "instance"))
        tasks = [Task(int(t["id"]), int(t["type"]),
                      None if t.get("x") is None else float(t["x"]),
                      None if t.get("y") is None else float(t["y"]))
                 for t in data["tasks"]]
        agents = [Agent(int(a["id"]), int(a["type"])) for a in data["agents"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise InstanceError(f"malformed instance: {exc!r}") from exc

    has_xy = bool(tasks) and all(t.x is not None and t.y is not None for t in tasks)
    has_matrix = data.get("distances") is not None
    if has_matrix == has_xy:
        raise InstanceError("exactly one of: coordinates for every task, or a full distance matrix")

    depot_xy = None
    if has_matrix:
        try:
            dist = np.array(data["distances"], dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise InstanceError(f"malformed distance matrix: {exc}") from exc
    else:
        pts = np.array([[t.x, t.y] for t in tasks])
        if "depot" in data:
            depot_xy = (float(data["depot"]["x"]), float(data["depot"]["y"]))
        else:
            depot_xy = tuple(float(c) for c in pts.mean(axis=0))
        dist = euclidean_matrix(np.vstack([np.array(depot_xy)[None, :], pts]))
    return Instance(name, tuple(tasks), tuple(agents), dist, depot_xy)


def load_instance(path: str | Path) -> Instance:
    """Read and validate an instance JSON file.

    Raises InstanceError on parse failure or on the first violated invariant.
    """
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InstanceError(f"{path}: top level must be an object")
    inst = instance_from_dict(data)
    problems = validate_metric(inst)
    if problems:
        raise InstanceError(str(problems[0]))
    return inst


# ---------------------------------------------------------------------------
# generators

def generate_euclidean(seed: int, n_tasks: int, k_agents: int, m_types: int,
                       generic_fraction: float) -> Instance:
    """Random instance on the unit square with the depot at the task centroid.

    ``round(generic_fraction * n_tasks)`` tasks are generic; the rest get a
    uniform type in ``1..m_types``.  Agents cycle through the types, so every
    type has at least one agent.
    """
    if n_tasks < 1 or k_agents < 1:
        raise ValueError("need n_tasks >= 1 and k_agents >= 1")
    if not 1 <= m_types <= k_agents:
        raise ValueError("need 1 <= m_types <= k_agents")
    if not 0.0 <= generic_fraction <= 1.0:
        raise ValueError("generic_fraction must lie in [0, 1]")

    rng = np.random.default_rng(seed)
    pts = rng.random((n_tasks, 2))
    n_generic = int(round(generic_fraction * n_tasks))
    types = rng.integers(1, m_types + 1, size=n_tasks)
    types[rng.permutation(n_tasks)[:n_generic]] = GENERIC

    depot_xy = tuple(float(c) for c in pts.mean(axis=0))
    tasks = tuple(Task(i + 1, int(types[i]), float(pts[i, 0]), float(pts[i, 1]))
                  for i in range(n_tasks))
    agents = tuple(Agent(j + 1, j % m_types + 1) for j in range(k_agents))
    dist = euclidean_matrix(np.vstack([np.array(depot_xy)[None, :], pts]))
    name = f"euclidean-s{seed}-n{n_tasks}-k{k_agents}-m{m_types}-g{generic_fraction:g}"
    return Instance(name, tasks, agents, dist, depot_xy)


def _road_network_instance(name: str, places: list[str], edges: list[tuple[str, str, float]],
                           task_places: list[tuple[str, int]], agents: list[Agent]) -> Instance:
    """Materialize a drawn road network: tasks sit on places, distances are
    shortest-path lengths; co-located tasks are at distance 0."""
    index = {p: i for i, p in enumerate(places)}
    w = np.full((len(places), len(places)), np.inf)
    for a, b, length in edges:
        w[index[a], index[b]] = w[index[b], index[a]] = min(w[index[a], index[b]], length)
    closure = metric_closure(w)
    where = [index["vs"]] + [index[p] for p, _ in task_places]
    dist = closure[np.ix_(where, where)]
    tasks = tuple(Task(i + 1, typ) for i, (_, typ) in enumerate(task_places))
    return Instance(name, tasks, tuple(agents), dist)


def generate_example(which: int, d: float = 4.0, d_prime: float = 3.0, k: int = 4) -> Instance:
    """The four illustrative layouts (tasks t_1.. get ids and node indices 1..).

    1. nine tasks around V_1/V_2 with parameters ``d`` and ``d_prime``
    2. two type-1 agents, two type tasks at A, two generic tasks at B
    3. one type-1 task at A, two generic tasks at B, agents of types 1 and 2
    4. ``k`` distinct agents, ``2k - 1`` tasks on a unit star
    """
    if which == 1:
        if not (d_prime > 2 and d > 3):
            raise ValueError("example 1 needs d' > 2 and d > 3")
        places = ["vs", "V1", "V2", "A", "B", "C"]
        edges = [("A", "V1", 1.0), ("V1", "C", 1.0), ("V1", "B", 1.0),
                 ("C", "V2", d), ("vs", "V1", d_prime), ("vs", "V2", d_prime)]
        task_places = [("A", 0), ("A", 0), ("B", 0), ("B", 0), ("C", 0), ("C", 0),
                       ("V1", 1), ("V1", 2), ("V2", 3)]
        agents = [Agent(1, 1), Agent(2, 2), Agent(3, 3)]
        return _road_network_instance(f"example1-d{d:g}-dp{d_prime:g}", places, edges,
                                      task_places, agents)
    if which == 2:
        places = ["vs", "A", "B"]
        edges = [("vs", "A", 1.0), ("vs", "B", 1.0)]
        task_places = [("A", 1), ("A", 1), ("B", 0), ("B", 0)]
        return _road_network_instance("example2", places, edges, task_places,
                                      [Agent(1, 1), Agent(2, 1)])
    if which == 3:
        places = ["vs", "A", "B"]
        edges = [("vs", "A", 1.0), ("vs", "B", 1.0)]
        task_places = [("A", 1), ("B", 0), ("B", 0)]
        return _road_network_instance("example3", places, edges, task_places,
                                      [Agent(1, 1), Agent(2, 2)])
    if which == 4:
        if k < 2:
            raise ValueError("example 4 needs k >= 2")
        places = ["vs"] + [f"V{i}" for i in range(1, k + 1)]
        edges = [("vs", f"V{i}", 1.0) for i in range(1, k + 1)]
        task_places = [(f"V{i}", i) for i in range(1, k)]
        task_places += [(f"V{k}", 0)] * k
        agents = [Agent(i, i) for i in range(1, k + 1)]
        return _road_network_instance(f"example4-k{k}", places, edges, task_places, agents)
    raise ValueError(f"unknown example {which!r}; expected 1..4")
