"""Single-agent planning under constraints: safe intervals, SIPP and SIPPS-WC.

Times here are whatever the instance uses; the high level hands in integer
tick instances, but nothing below relies on that.

A *stay* ``[a, b]`` at ``v`` is legal when it lies inside one interval of the
vertex's dwell set.  That set is ``[0, inf)`` minus every Wait range and, for
every Occupancy point ``t``, minus the window ``(t - tau_out, t + tau_in)``: a
stay that ends inside the window leaves on an edge still covering ``t``, and one
that starts inside it arrived on an edge covering ``t``.  The remaining,
duration-specific part of an Occupancy point is applied per move as a
forbidden departure window, together with the Motion ranges.
"""

from __future__ import annotations

import heapq
import itertools
import time as _time
import weakref
from collections import defaultdict
from typing import Iterable, Mapping, Sequence

from .constraints import Constraint, MotionConstraint, OccupancyConstraint, WaitConstraint, WILDCARD
from .model import Instance, Path, Vertex, make_path, path_occupancy, vertex_sort_key
from .timebase import INF, Interval, Time, fmt_exact, merge, overlap, subtract, subtract_all

FULL = Interval(0, INF)


class PlannerTimeout(Exception):
    """Raised when a planner call passes its deadline."""


class SafeIntervalTable:
    """Per-vertex dwell sets and per-move forbidden departure windows for one agent."""

    def __init__(self, agent: int, inst: Instance, constraints: Iterable[Constraint] = ()):
        self.agent = agent
        self.inst = inst
        self._dur = inst.durations[agent]
        self._dwell: dict = {}
        self.motion_edge: dict = defaultdict(list)
        self.motion_out: dict = defaultdict(list)
        self.motion_in: dict = defaultdict(list)
        self.occupancy_points: dict = defaultdict(list)
        waits: dict = defaultdict(list)
        for c in constraints:
            if c.agent != agent:
                raise ValueError(f"constraint {c} is not for agent {agent}")
            if isinstance(c, MotionConstraint):
                if c.from_vertex is WILDCARD:
                    self.motion_in[c.to_vertex].append(c.range)
                elif c.to_vertex is WILDCARD:
                    self.motion_out[c.from_vertex].append(c.range)
                else:
                    self.motion_edge[(c.from_vertex, c.to_vertex)].append(c.range)
            elif isinstance(c, WaitConstraint):
                waits[c.vertex].append(c.range)
            elif isinstance(c, OccupancyConstraint):
                self.occupancy_points[c.vertex].append(c.at)
            else:
                raise TypeError(f"unknown constraint {c!r}")
        for v in set(waits) | set(self.occupancy_points):
            cuts = list(waits.get(v, ()))
            nbrs = inst.adjacency.get(v, ())
            tin = min((self._dur[(u, v)] for u in nbrs), default=None)
            tout = min((self._dur[(v, u)] for u in nbrs), default=None)
            for t in self.occupancy_points.get(v, ()):
                if tin is None:
                    cuts.append(Interval.point(t))
                elif t - tout < 0:
                    cuts.append(Interval(0, t + tin, True, False))
                else:
                    cuts.append(Interval(t - tout, t + tin, False, False))
            pieces = [FULL]
            for cut in cuts:
                pieces = subtract_all(pieces, cut)
            self._dwell[v] = sorted(pieces, key=lambda iv: (iv.lo, not iv.lo_closed))
        self._windows: dict = {}

    def intervals(self, v: Vertex) -> list[Interval]:
        """Exact dwell set of ``v``: sorted, disjoint, maximal intervals."""
        return self._dwell.get(v, [FULL])

    def safe_intervals(self, v: Vertex) -> list[Interval]:
        """Dwell set in ``[lo, hi)`` form: the windows in which a positive wait can start.

        A right-closed piece ``[lo, hi]`` is reported as ``[lo, hi)``; single
        instants (pass-through only) are dropped.
        """
        out = []
        for iv in self.intervals(v):
            if iv.is_point:
                continue
            out.append(Interval(iv.lo, iv.hi, iv.lo_closed, False))
        return out

    def departure_windows(self, u: Vertex, w: Vertex) -> tuple:
        """Times at which the agent may not start moving ``u -> w``."""
        key = (u, w)
        hit = self._windows.get(key)
        if hit is not None:
            return hit
        d = self._dur[key]
        out = []
        out.extend(self.motion_edge.get(key, ()))
        out.extend(self.motion_out.get(u, ()))
        out.extend(self.motion_in.get(w, ()))
        for t in self.occupancy_points.get(u, ()):
            # source held over [b, b + d)
            iv = Interval.make(max(t - d, 0), t, t - d < 0, True)
            if iv is not None:
                out.append(iv)
        for t in self.occupancy_points.get(w, ()):
            # target held over (b, b + d]
            iv = Interval.make(max(t - d, 0), t, True, False)
            if iv is not None:
                out.append(iv)
        res = tuple(out)
        self._windows[key] = res
        return res

    def interval_index(self, v: Vertex, t: Time) -> int | None:
        for k, iv in enumerate(self.intervals(v)):
            if iv.contains(t):
                return k
        return None

    def to_json(self) -> dict:
        def ivs(lst):
            return [[fmt_exact(i.lo), fmt_exact(i.hi), i.lo_closed, i.hi_closed] for i in lst]

        verts = sorted(set(self._dwell) | set(self.motion_in) | set(self.motion_out), key=vertex_sort_key)
        return {
            "agent": self.agent,
            "vertices": {
                str(v): {
                    "dwell": ivs(self.intervals(v)),
                    "entry": ivs(self.motion_in.get(v, ())),
                    "exit": ivs(self.motion_out.get(v, ())),
                    "occupancy": [fmt_exact(t) for t in self.occupancy_points.get(v, ())],
                }
                for v in verts
            },
            "edges": {f"{u}->{w}": ivs(r) for (u, w), r in sorted(self.motion_edge.items(), key=str)},
        }


def build_safe_intervals(agent: int, constraints: Iterable[Constraint], inst: Instance) -> SafeIntervalTable:
    return SafeIntervalTable(agent, inst, constraints)


_H_CACHE: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def heuristic(agent: int, inst: Instance) -> dict:
    """Shortest travel time from every vertex to the agent's goal; unreachable vertices are absent."""
    per_inst = _H_CACHE.setdefault(inst, {})
    if agent in per_inst:
        return per_inst[agent]
    dur = inst.durations[agent]
    goal = inst.goals[agent]
    dist = {goal: 0}
    heap = [(0, 0, goal)]
    tie = itertools.count(1)
    while heap:
        d, _, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for w in inst.adjacency[u]:
            nd = d + dur[(w, u)]
            if w not in dist or nd < dist[w]:
                dist[w] = nd
                heapq.heappush(heap, (nd, next(tie), w))
    per_inst[agent] = dist
    return dist


# -- soft occupancy ------------------------------------------------------------


def soft_table(paths: Iterable[Path]) -> dict:
    """Foreign occupancy per vertex: each path's maximal intervals, sorted by start."""
    table: dict = defaultdict(list)
    for p in paths:
        for v, ivs in path_occupancy(p).items():
            table[v].extend(ivs)
    for ivs in table.values():
        ivs.sort(key=lambda iv: (iv.lo, not iv.lo_closed))
    return dict(table)


def _count(soft: Mapping, v: Vertex, span: Interval) -> int:
    n = 0
    for iv in soft.get(v, ()):
        if iv.lo > span.hi:
            break
        if overlap(iv, span):
            n += 1
    return n


# -- search --------------------------------------------------------------------


class _Node:
    __slots__ = ("v", "k", "t", "lo", "lo_closed", "soft", "cw", "parent", "dep", "terminal")

    def __init__(self, v, k, t, lo, lo_closed, soft, cw, parent, dep, terminal=False):
        self.v = v
        self.k = k
        self.t = t
        self.lo = lo
        self.lo_closed = lo_closed
        self.soft = soft
        self.cw = cw
        self.parent = parent
        self.dep = dep
        self.terminal = terminal


def _earliest(pieces: list[Interval]) -> Time | None:
    best = None
    for p in pieces:
        if best is None or p.lo < best.lo or (p.lo == best.lo and p.lo_closed):
            best = p
    if best is None or not best.lo_closed:
        return None
    return best.lo


class Successor:
    """One generated child, exposed for inspection."""

    __slots__ = ("vertex", "departure", "arrival", "interval", "wait_conflicts", "soft")

    def __init__(self, vertex, departure, arrival, interval, wait_conflicts, soft):
        self.vertex = vertex
        self.departure = departure
        self.arrival = arrival
        self.interval = interval
        self.wait_conflicts = wait_conflicts
        self.soft = soft

    def __repr__(self) -> str:
        return (
            f"Successor({self.vertex!r}, dep={fmt_exact(self.departure)}, "
            f"interval={self.interval}, c_w={self.wait_conflicts}, soft={self.soft})"
        )


class Planner:
    """SIPP (``soft is None``) or SIPPS-WC search for one agent."""

    def __init__(
        self,
        agent: int,
        inst: Instance,
        constraints: Iterable[Constraint] = (),
        soft: Mapping | None = None,
        prune: bool = True,
        deadline: float | None = None,
    ):
        self.agent = agent
        self.inst = inst
        self.table = SafeIntervalTable(agent, inst, constraints)
        self.soft = soft
        self.prune = prune
        self.deadline = deadline
        self.h = heuristic(agent, inst)
        self.dur = inst.durations[agent]
        self.expanded = 0

    def _span(self, node: _Node, end: Time) -> Interval:
        return Interval(node.lo, end, node.lo_closed, False)

    def _wait_conflicts(self, v, lo, lo_closed, k) -> int:
        if self.soft is None:
            return 0
        hi = self.table.intervals(v)[k].hi
        span = Interval.make(lo, hi, lo_closed, True)
        return 0 if span is None else _count(self.soft, v, span)

    def successors(self, node: _Node) -> list[Successor]:
        """Children of a state: per neighbour and reachable interval, earliest departure
        plus (with soft tables) the earliest departures clearing each foreign occupancy."""
        u, a = node.v, node.t
        cur = self.table.intervals(u)[node.k]
        out = []
        for w in self.inst.adjacency[u]:
            if w not in self.h:
                continue
            d = self.dur[(u, w)]
            windows = self.table.departure_windows(u, w)
            targets = self.table.intervals(w)
            for k, K in enumerate(targets):
                if K.hi < a + d or (K.hi == a + d and not K.hi_closed):
                    continue
                if K.lo - d > cur.hi:
                    break
                window = Interval.make(a, cur.hi, True, cur.hi_closed)
                if window is None:
                    continue
                dep = window.intersect(K.shift(-d))
                if dep is None:
                    continue
                pieces = [dep]
                for f in windows:
                    pieces = subtract_all(pieces, f)
                    if not pieces:
                        break
                b = _earliest(pieces)
                if b is None:
                    continue
                cands = [b]
                if self.soft is not None:
                    for f in self.soft.get(w, ()):
                        e = f.hi
                        if e == INF or e <= b:
                            continue
                        later = [p.intersect(Interval(e, INF)) for p in pieces]
                        b2 = _earliest([p for p in later if p is not None])
                        if b2 is not None and b2 not in cands:
                            cands.append(b2)
                for b in cands:
                    soft_total = node.soft
                    if self.soft is not None:
                        soft_total += _count(self.soft, u, self._span(node, b + d))
                    cw = self._wait_conflicts(w, b, False, k)
                    out.append(Successor(w, b, b + d, Interval(b + d, K.hi, True, K.hi_closed) if K.hi != b + d
                                         else Interval.point(b + d), cw, soft_total))
        return out

    def _child(self, node: _Node, s: Successor) -> _Node:
        k = self.table.interval_index(s.vertex, s.arrival)
        return _Node(s.vertex, k, s.arrival, s.departure, False, s.soft, s.wait_conflicts, node, s.departure)

    def root(self) -> _Node | None:
        start = self.inst.starts[self.agent]
        if start not in self.h:
            return None
        k = self.table.interval_index(start, 0)
        if k is None:
            return None
        return _Node(start, k, 0, 0, True, 0, self._wait_conflicts(start, 0, True, k), None, None)

    def plan(self) -> Path | None:
        root = self.root()
        if root is None:
            return None
        goal = self.inst.goals[self.agent]
        h = self.h
        tie = itertools.count()
        heap = [(h[root.v], 0, 0, vertex_sort_key(root.v), next(tie), root)]
        seen: dict = {}
        check = 0
        while heap:
            _, _, _, _, _, node = heapq.heappop(heap)
            if node.terminal:
                return self._path(node)
            if self.deadline is not None:
                check += 1
                if check & 255 == 0 and _time.monotonic() > self.deadline:
                    raise PlannerTimeout
            self.expanded += 1
            iv = self.table.intervals(node.v)[node.k]
            if node.v == goal and iv.hi == INF:
                soft = node.soft
                if self.soft is not None:
                    soft += _count(self.soft, goal, Interval(node.lo, INF, node.lo_closed, False))
                term = _Node(node.v, node.k, node.t, node.lo, node.lo_closed, soft, 0, node.parent, node.dep, True)
                heapq.heappush(heap, (node.t, soft, -node.t, vertex_sort_key(node.v), next(tie), term))
                continue
            for s in self.successors(node):
                child = self._child(node, s)
                if self._dominated(seen, child):
                    continue
                f = child.t + h[child.v]
                heapq.heappush(heap, (f, child.soft, -child.t, vertex_sort_key(child.v), next(tie), child))
        return None

    def _dominated(self, seen: dict, n: _Node) -> bool:
        if self.prune:
            key = (n.v, n.k, n.cw)
            rows = seen.setdefault(key, [])
            for t, s in rows:
                if t <= n.t and s <= n.soft:
                    return True
            rows[:] = [(t, s) for t, s in rows if not (n.t <= t and n.soft <= s)]
            rows.append((n.t, n.soft))
            return False
        key = (n.v, n.k, n.cw, n.t)
        best = seen.get(key)
        if best is not None and best <= n.soft:
            return True
        seen[key] = n.soft
        return False

    def _path(self, node: _Node) -> Path:
        chain = []
        while node is not None:
            chain.append(node)
            node = node.parent
        chain.reverse()
        steps = [(n.dep, n.v, n.t) for n in chain[1:]]
        return make_path(self.agent, chain[0].v, steps)


def sipp_plan(
    agent: int, constraints: Sequence[Constraint], inst: Instance, deadline: float | None = None
) -> Path | None:
    """Minimum-cost path for ``agent`` respecting ``constraints``, or None."""
    return Planner(agent, inst, constraints, deadline=deadline).plan()


def sipps_wc_plan(
    agent: int,
    constraints: Sequence[Constraint],
    inst: Instance,
    soft: Mapping | Sequence[Path] | None = None,
    prune: bool = True,
    deadline: float | None = None,
) -> Path | None:
    """Like :func:`sipp_plan`, preferring among optimal paths those overlapping ``soft`` least.

    ``soft`` is a table from :func:`soft_table` or a list of other agents' paths.
    """
    if soft is None:
        soft = {}
    elif not isinstance(soft, Mapping):
        soft = soft_table(soft)
    return Planner(agent, inst, constraints, soft=soft, prune=prune, deadline=deadline).plan()


def count_soft(path: Path, soft: Mapping) -> int:
    """Soft conflicts of a whole path: overlaps of its visits with foreign maximal intervals."""
    n = 0
    for v, ivs in path_occupancy(path).items():
        for iv in ivs:
            n += _count(soft, v, iv)
    return n
