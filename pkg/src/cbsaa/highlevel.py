"""Constraint-tree search over per-agent constraint sets."""

from __future__ import annotations

import enum
import heapq
import itertools
import time as _time
from dataclasses import dataclass, field

from .conflicts import Conflict, all_conflicts
from .constraints import Branch, gen_cma, gen_csa
from .lowlevel import PlannerTimeout, sipp_plan, sipps_wc_plan, soft_table
from .model import Instance, Path, VertexTiming, scale_solution, sum_of_costs, vertex_timing
from .timebase import Time


class Mode(enum.Enum):
    CSA = "csa"
    CMA = "cma"
    CMAS = "cmas"

    @classmethod
    def parse(cls, value) -> "Mode":
        if isinstance(value, Mode):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown mode {value!r}; expected csa, cma or cmas") from None


class Outcome(enum.Enum):
    SOLVED = "solved"
    TIMEOUT = "timeout"
    UNSOLVABLE = "unsolvable"


@dataclass
class Stats:
    expansions: int = 0
    generations: int = 0
    lowlevel_calls: int = 0
    wall_ms: float = 0.0


@dataclass
class SolveResult:
    outcome: Outcome
    solution: list | None = None
    soc: Time | None = None
    stats: Stats = field(default_factory=Stats)
    note: str = ""

    @property
    def solved(self) -> bool:
        return self.outcome is Outcome.SOLVED


@dataclass(eq=False)
class HighLevelNode:
    paths: list
    constraints: tuple  # per agent, tuple of constraints
    soc: Time
    conflicts: list
    depth: int = 0

    @property
    def conflict(self) -> Conflict | None:
        return self.conflicts[0] if self.conflicts else None


class _Budget:
    def __init__(self, time_limit, node_limit):
        self.start = _time.monotonic()
        self.deadline = None if time_limit is None else self.start + time_limit
        self.node_limit = node_limit

    def expired(self, expansions: int) -> bool:
        if self.node_limit is not None and expansions >= self.node_limit:
            return True
        return self.deadline is not None and _time.monotonic() > self.deadline


class CBS:
    """Best-first search over constraint-tree nodes on an integer-tick instance."""

    def __init__(self, inst: Instance, mode: Mode, deadline: float | None = None):
        self.inst = inst
        self.mode = mode
        self.vt: VertexTiming = vertex_timing(inst)
        self.deadline = deadline
        self.stats = Stats()

    def plan(self, agent: int, constraints, paths) -> Path | None:
        self.stats.lowlevel_calls += 1
        if self.mode is Mode.CMAS:
            others = [p for k, p in enumerate(paths) if k != agent and p is not None]
            return sipps_wc_plan(agent, constraints, self.inst, soft_table(others), deadline=self.deadline)
        return sipp_plan(agent, constraints, self.inst, deadline=self.deadline)

    def make_node(self, paths, constraints, depth) -> HighLevelNode:
        return HighLevelNode(list(paths), constraints, sum_of_costs(paths), all_conflicts(paths), depth)

    def root(self) -> HighLevelNode | None:
        n = self.inst.num_agents
        paths: list = [None] * n
        for a in range(n):
            p = self.plan(a, (), paths)
            if p is None:
                return None
            paths[a] = p
        return self.make_node(paths, tuple(() for _ in range(n)), 0)

    def branches(self, c: Conflict) -> tuple[Branch, Branch]:
        if self.mode is Mode.CSA:
            return gen_csa(c)
        return gen_cma(c, self.vt)

    def expand(self, node: HighLevelNode) -> list[HighLevelNode]:
        c = node.conflict
        if c is None:
            return []
        children = []
        for branch in self.branches(c):
            a = branch.agent
            cons = list(node.constraints)
            cons[a] = cons[a] + tuple(branch.constraints)
            p = self.plan(a, cons[a], node.paths)
            if p is None:
                continue
            paths = list(node.paths)
            paths[a] = p
            children.append(self.make_node(paths, tuple(cons), node.depth + 1))
        return children


def expand(node: HighLevelNode, mode, inst: Instance) -> list[HighLevelNode]:
    """Children of ``node`` (tick-scaled ``inst``), one per feasible branch."""
    return CBS(inst, Mode.parse(mode)).expand(node)


def solve(
    inst: Instance,
    mode="cma",
    time_limit: float | None = None,
    node_limit: int | None = None,
    trace: list | None = None,
) -> SolveResult:
    """Minimum sum-of-costs solution, or the reason none was returned.

    ``trace`` (if given) receives the conflict resolved at every expansion.
    """
    mode = Mode.parse(mode)
    budget = _Budget(time_limit, node_limit)
    ticks, unit = inst.to_ticks()
    cbs = CBS(ticks, mode, budget.deadline)
    stats = cbs.stats

    def finish(outcome, node=None, note=""):
        stats.wall_ms = (_time.monotonic() - budget.start) * 1000.0
        if node is None:
            return SolveResult(outcome, stats=stats, note=note)
        sol = scale_solution(node.paths, unit)
        return SolveResult(outcome, sol, sum_of_costs(sol), stats, note)

    for a in range(ticks.num_agents):
        if not ticks.reachable(a):
            return finish(Outcome.UNSOLVABLE, note=f"agent {a} cannot reach its goal")
    try:
        root = cbs.root()
    except PlannerTimeout:
        return finish(Outcome.TIMEOUT)
    if root is None:
        return finish(Outcome.UNSOLVABLE, note="no individual path at the root")
    tie = itertools.count()
    open_ = [(root.soc, len(root.conflicts), -root.depth, next(tie), root)]
    stats.generations = 1
    while open_:
        if budget.expired(stats.expansions):
            return finish(Outcome.TIMEOUT)
        node = heapq.heappop(open_)[-1]
        stats.expansions += 1
        if node.conflict is None:
            return finish(Outcome.SOLVED, node)
        if trace is not None:
            trace.append(node.conflict)
        try:
            children = cbs.expand(node)
        except PlannerTimeout:
            return finish(Outcome.TIMEOUT)
        for child in children:
            stats.generations += 1
            heapq.heappush(open_, (child.soc, len(child.conflicts), -child.depth, next(tie), child))
    return finish(Outcome.UNSOLVABLE, note="constraint tree exhausted")
