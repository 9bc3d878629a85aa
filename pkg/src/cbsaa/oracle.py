"""Exhaustive joint-state solver for small instances, used to certify optimality.

The search is event driven.  At each event time (time 0 and every arrival of
any agent) the idle agents decide one at a time, in index order, whether to
start a move, keep waiting, or stay at their goal for good.  A move into ``w``
is allowed exactly when no other agent is standing at ``w``, travelling into
or out of ``w``, or parked there for good.

Restricting departures to event times loses nothing: take any conflict-free
schedule and move each departure as early as it can go while the rest stays
fixed.  The only thing that stops it is the agent's own arrival at the source
or another agent's occupancy of the target ending, which happens when that
agent arrives somewhere else.  Both are event times.
"""

from __future__ import annotations

import heapq
import itertools
import time as _time
from typing import NamedTuple

from .highlevel import Outcome, SolveResult, Stats
from .lowlevel import heuristic
from .model import Action, Instance, Path, scale_solution, sum_of_costs, vertex_sort_key
from .timebase import INF, Time

IDLE, MOVING, DONE = 0, 1, 2


class AgentState(NamedTuple):
    kind: int
    at: object  # current vertex (IDLE/DONE) or source (MOVING)
    to: object  # target while MOVING
    since: Time | None  # arrival time (IDLE at goal / DONE), departure time (MOVING)
    until: Time | None  # arrival time while MOVING


class _Node:
    __slots__ = ("clock", "cursor", "agents", "parent", "f")

    def __init__(self, clock, cursor, agents, parent, f):
        self.clock = clock
        self.cursor = cursor
        self.agents = agents
        self.parent = parent
        self.f = f


def _bound(a: AgentState, goal, h, clock) -> Time:
    if a.kind == DONE:
        return a.since
    if a.kind == MOVING:
        return a.until + h[a.to]
    if a.at == goal:
        return a.since
    return clock + h[a.at]


def default_horizon(inst: Instance) -> Time:
    worst = 0
    for a in range(inst.num_agents):
        h = heuristic(a, inst)
        longest = max(inst.durations[a].values(), default=0)
        worst = max(worst, h.get(inst.starts[a], 0) + longest * len(inst.adjacency))
    return worst * max(inst.num_agents, 1)


def oracle_solve(
    inst: Instance,
    time_limit: float | None = None,
    node_limit: int | None = None,
    horizon: Time | None = None,
) -> SolveResult:
    """Optimal sum-of-costs solution by A* over joint event states.

    ``horizon`` caps the clock (in the instance's own time units); when the
    cap is what made the search give up, the result note says so.
    """
    start_time = _time.monotonic()
    stats = Stats()
    ticks, unit = inst.to_ticks()
    n = ticks.num_agents

    def finish(outcome, node=None, note=""):
        stats.wall_ms = (_time.monotonic() - start_time) * 1000.0
        if node is None:
            return SolveResult(outcome, stats=stats, note=note)
        sol = scale_solution(_extract(ticks, node), unit)
        return SolveResult(outcome, sol, sum_of_costs(sol), stats, note)

    hs = [heuristic(a, ticks) for a in range(n)]
    for a in range(n):
        if ticks.starts[a] not in hs[a]:
            return finish(Outcome.UNSOLVABLE, note=f"agent {a} cannot reach its goal")
    if horizon is None:
        cap = default_horizon(ticks)
    else:
        cap = horizon / unit
    goals = ticks.goals
    durs = ticks.durations
    adj = ticks.adjacency

    def f_of(clock, agents):
        return sum(_bound(s, goals[k], hs[k], clock) for k, s in enumerate(agents))

    init = tuple(
        AgentState(IDLE, ticks.starts[k], None, 0 if ticks.starts[k] == goals[k] else None, None) for k in range(n)
    )
    root = _Node(0, 0, init, None, f_of(0, init))
    tie = itertools.count()
    heap = [(root.f, 0, 0, next(tie), root)]
    closed = set()
    hit_horizon = False
    while heap:
        if node_limit is not None and stats.expansions >= node_limit:
            return finish(Outcome.TIMEOUT)
        if time_limit is not None and stats.expansions & 255 == 0 and _time.monotonic() - start_time > time_limit:
            return finish(Outcome.TIMEOUT)
        node = heapq.heappop(heap)[-1]
        key = (node.clock, node.cursor, node.agents)
        if key in closed:
            continue
        closed.add(key)
        stats.expansions += 1
        if all(s.kind == DONE for s in node.agents):
            return finish(Outcome.SOLVED, node)
        if node.clock > cap:
            hit_horizon = True
            continue
        for child in _children(node, n, goals, durs, adj, hs):
            child.f = f_of(child.clock, child.agents)
            stats.generations += 1
            heapq.heappush(heap, (child.f, -child.clock, -child.cursor, next(tie), child))
    if hit_horizon:
        return finish(Outcome.UNSOLVABLE, note="unsolvable within horizon")
    return finish(Outcome.UNSOLVABLE, note="joint state space exhausted")


def _blocked(agents, me, w) -> bool:
    for k, s in enumerate(agents):
        if k == me:
            continue
        if s.at == w or (s.kind == MOVING and s.to == w):
            return True
    return False


def _advance(node: _Node, agents, goals) -> _Node | None:
    """Close the current epoch: jump to the next arrival and land those agents."""
    arrivals = [s.until for s in agents if s.kind == MOVING]
    if not arrivals:
        return None
    t = min(arrivals)
    landed = tuple(
        AgentState(IDLE, s.to, None, t if s.to == goals[k] else None, None)
        if s.kind == MOVING and s.until == t
        else s
        for k, s in enumerate(agents)
    )
    return _Node(t, 0, landed, node, 0)


def _children(node: _Node, n, goals, durs, adj, hs) -> list[_Node]:
    agents = node.agents
    k = node.cursor
    while k < n and agents[k].kind != IDLE:
        k += 1
    if k == n:
        nxt = _advance(node, agents, goals)
        return [] if nxt is None else [nxt]
    s = agents[k]
    t = node.clock
    out = []

    def with_(new):
        lst = list(agents)
        lst[k] = new
        return tuple(lst)

    if s.at == goals[k]:
        out.append(_Node(t, k + 1, with_(AgentState(DONE, s.at, None, s.since, None)), node, 0))
    for w in sorted(adj[s.at], key=vertex_sort_key):
        if w not in hs[k] or _blocked(agents, k, w):
            continue
        d = durs[k][(s.at, w)]
        out.append(_Node(t, k + 1, with_(AgentState(MOVING, s.at, w, t, t + d)), node, 0))
    # keep waiting: only useful if something will happen later
    if any(o.kind == MOVING for o in agents) or any(
        o.kind == IDLE for j, o in enumerate(agents) if j > k
    ):
        out.append(_Node(t, k + 1, agents, node, 0))
    return out


def _extract(inst: Instance, node: _Node) -> list[Path]:
    chain = []
    while node is not None:
        chain.append(node)
        node = node.parent
    chain.reverse()
    n = inst.num_agents
    moves: list = [[] for _ in range(n)]
    for prev, cur in zip(chain, chain[1:]):
        for k in range(n):
            a, b = prev.agents[k], cur.agents[k]
            if b.kind == MOVING and a.kind != MOVING:
                moves[k].append((b.since, b.to, b.until))
    paths = []
    for k in range(n):
        acts = []
        v, t = inst.starts[k], 0
        for dep, w, arr in moves[k]:
            if dep > t:
                acts.append(Action.wait(k, v, t, dep))
            acts.append(Action.move(k, v, w, dep, arr))
            v, t = w, arr
        acts.append(Action.wait(k, v, t, INF))
        paths.append(Path(tuple(acts)))
    return paths
