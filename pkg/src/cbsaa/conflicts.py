"""Duration-conflict detection, classification and solution validation."""

from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Sequence

from .model import Action, Instance, Path, Vertex, occupancy, vertex_sort_key
from .timebase import INF, Interval, Time, fmt_exact, overlap


class ConflictKind(enum.Enum):
    IN_IN = "in-in"
    OUT_IN = "out-in"
    WAIT_IN = "wait-in"


@dataclass(frozen=True)
class Conflict:
    """Two agents occupying ``vertex`` at overlapping times.

    ``action_i`` is always a move into ``vertex``; ``action_j`` is a move
    into it (IN-IN), a move out of it (OUT-IN) or a wait on it (WAIT-IN).
    ``time`` is the infimum of the overlap.
    """

    action_i: Action
    action_j: Action
    vertex: Vertex
    kind: ConflictKind
    time: Time

    @property
    def agent_i(self) -> int:
        return self.action_i.agent

    @property
    def agent_j(self) -> int:
        return self.action_j.agent

    def sort_key(self) -> tuple:
        return _order(self)

    def __str__(self) -> str:
        return f"<{self.action_i}, {self.action_j}, {self.vertex}>_{self.kind.value} @ {fmt_exact(self.time)}"


def classify(a1: Action, a2: Action, v: Vertex) -> tuple[ConflictKind, Action, Action]:
    """Return ``(kind, in_action, other_action)`` for two actions meeting at ``v``.

    Raises ValueError when neither action moves into ``v``.
    """
    in1 = a1.is_move and a1.to_vertex == v
    in2 = a2.is_move and a2.to_vertex == v
    if in1 and in2:
        first, second = (a1, a2) if a1.agent <= a2.agent else (a2, a1)
        return ConflictKind.IN_IN, first, second
    if not (in1 or in2):
        raise ValueError(f"no IN action at {v!r}: {a1}, {a2}")
    a_in, other = (a1, a2) if in1 else (a2, a1)
    if other.is_wait:
        if other.from_vertex != v:
            raise ValueError(f"{other} does not wait at {v!r}")
        return ConflictKind.WAIT_IN, a_in, other
    if other.from_vertex != v:
        raise ValueError(f"{other} does not leave {v!r}")
    return ConflictKind.OUT_IN, a_in, other


def _occupancy_index(solution: Sequence[Path]) -> dict:
    index: dict = defaultdict(list)
    for path in solution:
        for a in path.actions:
            for v, iv in occupancy(a):
                index[v].append((iv, a))
    for entries in index.values():
        entries.sort(key=lambda e: (e[0].lo, not e[0].lo_closed, e[1].agent))
    return index


def _overlapping_pairs(entries):
    """Yield overlapping entry pairs from one agent each; entries sorted by lower bound."""
    n = len(entries)
    for x in range(n):
        iv_x, a_x = entries[x]
        for y in range(x + 1, n):
            iv_y, a_y = entries[y]
            if iv_y.lo > iv_x.hi:
                break
            if a_x.agent != a_y.agent and overlap(iv_x, iv_y):
                yield iv_x, a_x, iv_y, a_y


def all_conflicts(solution: Sequence[Path]) -> list[Conflict]:
    """Every IN-involving overlapping action pair, sorted earliest first."""
    found = []
    for v, entries in _occupancy_index(solution).items():
        for iv_x, a_x, iv_y, a_y in _overlapping_pairs(entries):
            try:
                kind, a_i, a_j = classify(a_x, a_y, v)
            except ValueError:
                continue
            found.append(Conflict(a_i, a_j, v, kind, max(iv_x.lo, iv_y.lo)))
    found.sort(key=_order)
    return found


def _order(c: Conflict) -> tuple:
    return (c.time, c.agent_i, c.agent_j, vertex_sort_key(c.vertex), c.action_i.start, c.action_j.start)


def detect_earliest_conflict(solution: Sequence[Path]) -> Conflict | None:
    conflicts = all_conflicts(solution)
    return conflicts[0] if conflicts else None


def count_conflicts(solution: Sequence[Path]) -> int:
    return len(all_conflicts(solution))


# -- validation ---------------------------------------------------------------


@dataclass
class Violation:
    type: str
    agents: tuple
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"type": self.type, "agents": list(self.agents), **self.detail}


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def add(self, type_, agents, **detail) -> None:
        self.violations.append(Violation(type_, tuple(agents), detail))

    def of_type(self, type_: str) -> list[Violation]:
        return [v for v in self.violations if v.type == type_]

    def to_json(self, vertex_encoder=str) -> dict:
        out = []
        for v in self.violations:
            rec = v.to_json()
            if "vertex" in rec:
                rec["vertex"] = vertex_encoder(rec["vertex"])
            out.append(rec)
        return {"valid": self.ok, "violations": out}


def _check_path(inst: Instance, agent: int, path: Path, report: ValidationReport) -> None:
    acts = path.actions
    if not acts:
        report.add("empty-path", [agent])
        return
    first = acts[0]
    if first.from_vertex != inst.starts[agent] or first.start != 0:
        report.add("wrong-start", [agent], vertex=first.from_vertex, time=fmt_exact(first.start))
    prev = None
    for k, a in enumerate(acts):
        if a.agent != agent:
            report.add("wrong-agent", [agent], index=k)
        if a.end != INF and a.end < a.start:
            report.add("negative-duration", [agent], index=k)
        if prev is not None and (prev.to_vertex != a.from_vertex or prev.end != a.start):
            report.add(
                "discontinuity",
                [agent],
                index=k,
                vertex=a.from_vertex,
                time=fmt_exact(a.start),
            )
        if a.is_move:
            d = inst.durations[agent].get((a.from_vertex, a.to_vertex))
            if d is None:
                report.add("not-an-edge", [agent], index=k, vertex=a.from_vertex)
            elif a.end - a.start != d:
                report.add(
                    "wrong-duration",
                    [agent],
                    index=k,
                    vertex=a.from_vertex,
                    expected=fmt_exact(d),
                    actual=fmt_exact(a.end - a.start),
                )
        elif a.end == INF and k != len(acts) - 1:
            report.add("infinite-wait-not-last", [agent], index=k)
        prev = a
    last = acts[-1]
    if not (last.is_wait and last.end == INF):
        report.add("no-terminal-wait", [agent])
    elif last.to_vertex != inst.goals[agent]:
        report.add("wrong-goal", [agent], vertex=last.to_vertex)


def validate(inst: Instance, solution: Sequence[Path]) -> ValidationReport:
    """Check paths individually and report every pairwise duration conflict."""
    report = ValidationReport()
    if len(solution) != inst.num_agents:
        report.add("wrong-agent-count", [], expected=inst.num_agents, actual=len(solution))
    for agent, path in enumerate(solution[: inst.num_agents]):
        _check_path(inst, agent, path, report)
    for v, entries in _occupancy_index(solution).items():
        for iv_x, a_x, iv_y, a_y in _overlapping_pairs(entries):
            try:
                kind, a_i, a_j = classify(a_x, a_y, v)
                label = kind.value
            except ValueError:
                a_i, a_j = (a_x, a_y) if a_x.agent < a_y.agent else (a_y, a_x)
                label = "other"
            report.add(
                "conflict",
                [a_i.agent, a_j.agent],
                vertex=v,
                kind=label,
                time=fmt_exact(max(iv_x.lo, iv_y.lo)),
                action_i=str(a_i),
                action_j=str(a_j),
            )
    return report
