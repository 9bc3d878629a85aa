"""Problem instances, timed actions, paths and duration occupancy."""

from __future__ import annotations

import enum
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .timebase import INF, Interval, Time, as_time, merge, normalize

Vertex = Hashable


def vertex_sort_key(v):
    """Total order on vertex ids, tolerant of mixed id types."""
    return (type(v).__name__, v)


class InstanceError(ValueError):
    """Raised for malformed instances."""


class ActionKind(enum.Enum):
    MOVE = "move"
    WAIT = "wait"


@dataclass(frozen=True, eq=False)
class Instance:
    """Undirected graph plus per-agent edge durations, starts and goals.

    ``durations[i]`` maps both orientations of every edge to agent ``i``'s
    traversal time.  Agents are indexed ``0..N-1``.
    """

    adjacency: Mapping[Vertex, tuple]
    durations: tuple
    starts: tuple
    goals: tuple
    name: str = ""
    labels: Mapping[Vertex, object] = field(default_factory=dict)

    @classmethod
    def build(
        cls,
        edges: Iterable[tuple],
        starts: Sequence[Vertex],
        goals: Sequence[Vertex],
        durations,
        vertices: Iterable[Vertex] = (),
        name: str = "",
        labels: Mapping[Vertex, object] | None = None,
    ) -> "Instance":
        """Assemble and validate an instance.

        ``durations`` is one entry per agent, each either a scalar (the same
        time on every edge), a mapping from undirected edge ``(u, v)`` to a
        time, or a callable ``f(u, v)``.
        """
        adj: dict = {}
        for v in vertices:
            adj.setdefault(v, set())
        edge_list = []
        for u, v in edges:
            if u == v:
                raise InstanceError(f"self-loop at {u!r}")
            adj.setdefault(u, set()).add(v)
            adj.setdefault(v, set()).add(u)
            edge_list.append((u, v))
        adjacency = {v: tuple(sorted(ns, key=vertex_sort_key)) for v, ns in adj.items()}
        if len(starts) != len(goals):
            raise InstanceError("starts and goals differ in length")
        if len(durations) != len(starts):
            raise InstanceError("one duration spec per agent is required")
        tables = []
        for i, spec in enumerate(durations):
            table = {}
            for u, v in edge_list:
                if callable(spec):
                    d = spec(u, v)
                elif isinstance(spec, Mapping):
                    d = spec[(u, v)] if (u, v) in spec else spec[(v, u)]
                else:
                    d = spec
                d = as_time(d)
                if d == INF or d <= 0:
                    raise InstanceError(f"agent {i}: duration of {u!r}-{v!r} must be positive and finite")
                table[(u, v)] = d
                table[(v, u)] = d
            tables.append(table)
        inst = cls(adjacency, tuple(tables), tuple(starts), tuple(goals), name, dict(labels or {}))
        inst.validate()
        return inst

    def validate(self) -> None:
        for i, (s, g) in enumerate(zip(self.starts, self.goals)):
            if s not in self.adjacency:
                raise InstanceError(f"agent {i}: start {s!r} is not a vertex")
            if g not in self.adjacency:
                raise InstanceError(f"agent {i}: goal {g!r} is not a vertex")
        if len(set(self.starts)) != len(self.starts):
            raise InstanceError("start vertices must be pairwise distinct")
        if len(set(self.goals)) != len(self.goals):
            raise InstanceError("goal vertices must be pairwise distinct")
        for i, table in enumerate(self.durations):
            for (u, v), d in table.items():
                if table.get((v, u)) != d:
                    raise InstanceError(f"agent {i}: asymmetric duration on {u!r}-{v!r}")

    @property
    def num_agents(self) -> int:
        return len(self.starts)

    @property
    def vertices(self) -> tuple:
        return tuple(self.adjacency)

    def edges(self) -> list[tuple]:
        """Each undirected edge once, as ``(u, v)`` with ``u`` listed first in adjacency order."""
        seen = set()
        out = []
        for u, ns in self.adjacency.items():
            for v in ns:
                if (v, u) not in seen:
                    seen.add((u, v))
                    out.append((u, v))
        return out

    def duration(self, agent: int, u: Vertex, v: Vertex) -> Time:
        try:
            return self.durations[agent][(u, v)]
        except KeyError:
            raise InstanceError(f"{u!r}-{v!r} is not an edge") from None

    def uniform_duration(self, agent: int) -> Time | None:
        """The agent's single edge duration if all its edges share it."""
        values = set(self.durations[agent].values())
        return next(iter(values)) if len(values) == 1 else None

    def reachable(self, agent: int) -> bool:
        """Whether the agent's goal is connected to its start."""
        start, goal = self.starts[agent], self.goals[agent]
        seen = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            if u == goal:
                return True
            for v in self.adjacency[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return False

    def with_tasks(self, starts, goals, durations=None) -> "Instance":
        inst = Instance(
            self.adjacency,
            self.durations if durations is None else tuple(durations),
            tuple(starts),
            tuple(goals),
            self.name,
            self.labels,
        )
        inst.validate()
        return inst

    def time_unit(self) -> Fraction:
        """Largest unit of which every duration is an integer multiple."""
        lcm = 1
        for table in self.durations:
            for d in table.values():
                lcm = math.lcm(lcm, Fraction(d).denominator)
        return Fraction(1, lcm)

    def to_ticks(self) -> tuple["Instance", Fraction]:
        """Rescale durations to integers; returns the new instance and its tick length."""
        unit = self.time_unit()
        if unit == 1 and all(isinstance(d, int) for t in self.durations for d in t.values()):
            return self, unit
        scale = unit.denominator
        tables = tuple({e: int(Fraction(d) * scale) for e, d in t.items()} for t in self.durations)
        return Instance(self.adjacency, tables, self.starts, self.goals, self.name, self.labels), unit


@dataclass(frozen=True, slots=True)
class Action:
    """A timed transition ``((from_vertex, start), (to_vertex, end))``."""

    agent: int
    from_vertex: Vertex
    to_vertex: Vertex
    start: Time
    end: Time

    @classmethod
    def move(cls, agent, u, v, start, end) -> "Action":
        return cls(agent, u, v, start, end)

    @classmethod
    def wait(cls, agent, v, start, end=INF) -> "Action":
        return cls(agent, v, v, start, end)

    @property
    def kind(self) -> ActionKind:
        return ActionKind.WAIT if self.from_vertex == self.to_vertex else ActionKind.MOVE

    @property
    def is_move(self) -> bool:
        return self.from_vertex != self.to_vertex

    @property
    def is_wait(self) -> bool:
        return self.from_vertex == self.to_vertex

    @property
    def duration(self) -> Time:
        return self.end - self.start

    def scaled(self, unit: Fraction) -> "Action":
        return Action(
            self.agent,
            self.from_vertex,
            self.to_vertex,
            normalize(Fraction(self.start) * unit),
            INF if self.end == INF else normalize(Fraction(self.end) * unit),
        )

    def __str__(self) -> str:
        from .timebase import fmt_exact

        return (
            f"a{self.agent}(({self.from_vertex},{fmt_exact(self.start)}),"
            f"({self.to_vertex},{fmt_exact(self.end)}))"
        )


def occupancy(a: Action) -> list[tuple[Vertex, Interval]]:
    """Vertices the action occupies and when.

    A move holds its source over ``[t1, t2)`` and its destination over
    ``(t1, t2]``; a wait holds its vertex over ``[t1, t2]`` (a single instant
    when zero-length).
    """
    if a.is_move:
        return [
            (a.from_vertex, Interval(a.start, a.end, True, False)),
            (a.to_vertex, Interval(a.start, a.end, False, True)),
        ]
    return [(a.from_vertex, Interval(a.start, a.end, True, a.end != INF))]


def occupancy_at(a: Action, v: Vertex) -> Interval | None:
    for w, iv in occupancy(a):
        if w == v:
            return iv
    return None


@dataclass(frozen=True)
class Path:
    """One agent's actions, ending with an infinite wait at its goal."""

    actions: tuple

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(self.actions))

    @property
    def agent(self) -> int:
        return self.actions[0].agent

    @property
    def cost(self) -> Time:
        return path_cost(self)

    def __len__(self) -> int:
        return len(self.actions)

    def __iter__(self):
        return iter(self.actions)

    def moves(self) -> list[Action]:
        return [a for a in self.actions if a.is_move]

    def scaled(self, unit: Fraction) -> "Path":
        return Path(tuple(a.scaled(unit) for a in self.actions))


Solution = list  # one Path per agent, index = agent id


def path_cost(p: Path) -> Time:
    """Start time of the terminal infinite wait."""
    last = p.actions[-1]
    if not (last.is_wait and last.end == INF):
        raise ValueError("path does not end with an infinite wait")
    # an infinite wait preceded by waits at the goal starts the stay earlier
    t = last.start
    for a in reversed(p.actions[:-1]):
        if a.is_wait and a.end == t:
            t = a.start
        else:
            break
    return t


def sum_of_costs(solution: Sequence[Path]) -> Time:
    return normalize(sum((path_cost(p) for p in solution), 0))


def path_occupancy(p: Path) -> dict:
    """Per-vertex merged occupancy of a whole path."""
    per_vertex: dict = defaultdict(list)
    for a in p.actions:
        for v, iv in occupancy(a):
            per_vertex[v].append(iv)
    return {v: merge(ivs) for v, ivs in per_vertex.items()}


def dwells(p: Path) -> list[tuple[Vertex, Time, Time]]:
    """Every stay at a vertex as ``(v, arrive, leave)``, zero-length ones included.

    These are exactly the wait actions of the path once implicit zero-length
    waits between consecutive moves (and before the first move) are made
    explicit, with back-to-back waits at one vertex fused.
    """
    out = []
    if not p.actions:
        return out
    first = p.actions[0]
    cur_v, cur_t = first.from_vertex, first.start
    for a in p.actions:
        if a.is_wait:
            continue
        out.append((cur_v, cur_t, a.start))
        cur_v, cur_t = a.to_vertex, a.end
    out.append((cur_v, cur_t, p.actions[-1].end))
    return out


def make_path(agent: int, start_vertex: Vertex, steps: Iterable[tuple], duration_of: Callable | None = None) -> Path:
    """Build a path from ``(departure_time, next_vertex, arrival_time)`` steps.

    Waits are inserted wherever a departure is later than the previous
    arrival; the path ends with an infinite wait at the last vertex.
    """
    actions = []
    v, t = start_vertex, 0
    for dep, nxt, arr in steps:
        dep, arr = as_time(dep), as_time(arr)
        if dep > t:
            actions.append(Action.wait(agent, v, t, dep))
        actions.append(Action.move(agent, v, nxt, dep, arr))
        v, t = nxt, arr
    actions.append(Action.wait(agent, v, t, INF))
    return Path(tuple(actions))


@dataclass(frozen=True, eq=False)
class VertexTiming:
    """Per-agent minimum incoming/outgoing edge durations at each vertex."""

    tau_in: tuple
    tau_out: tuple

    def in_(self, agent: int, v: Vertex) -> Time:
        try:
            return self.tau_in[agent][v]
        except KeyError:
            raise InstanceError(f"vertex {v!r} is isolated; minimum traversal time undefined") from None

    def out(self, agent: int, v: Vertex) -> Time:
        try:
            return self.tau_out[agent][v]
        except KeyError:
            raise InstanceError(f"vertex {v!r} is isolated; minimum traversal time undefined") from None


def vertex_timing(inst: Instance) -> VertexTiming:
    tau_in = []
    tau_out = []
    for table in inst.durations:
        tin: dict = {}
        tout: dict = {}
        for (u, v), d in table.items():
            if v not in tin or d < tin[v]:
                tin[v] = d
            if u not in tout or d < tout[u]:
                tout[u] = d
        tau_in.append(tin)
        tau_out.append(tout)
    return VertexTiming(tuple(tau_in), tuple(tau_out))


def scale_solution(solution: Sequence[Path], unit: Fraction) -> list[Path]:
    if unit == 1:
        return list(solution)
    return [p.scaled(unit) for p in solution]
