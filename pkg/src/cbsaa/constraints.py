"""Branch constraints and the two ways of generating them from a conflict.

``gen_csa`` targets only the two conflicting actions.  ``gen_cma`` uses each
agent's minimum traversal times at the conflict vertex to forbid whole
families of IN/OUT/WAIT actions over time ranges; any branch whose range would
come out empty, or that would not rule out its own agent's conflicting action,
is replaced by the CSA branch for the same conflict.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

from .conflicts import Conflict, ConflictKind
from .model import Action, Instance, InstanceError, Path, Vertex, VertexTiming, dwells, occupancy, vertex_sort_key
from .timebase import INF, Interval, Time, fmt_exact, normalize, overlap

WILDCARD = None


class ConstraintError(ValueError):
    pass


def _half_open(lo: Time, hi: Time) -> Interval:
    if not lo < hi:
        raise ConstraintError(f"invalid constraint range [{fmt_exact(lo)}, {fmt_exact(hi)})")
    return Interval(lo, hi, True, False)


@dataclass(frozen=True)
class MotionConstraint:
    """Forbids ``agent`` from starting a matching move at a time in ``range``.

    ``from_vertex`` or ``to_vertex`` (not both) may be :data:`WILDCARD`.
    """

    agent: int
    from_vertex: Vertex
    to_vertex: Vertex
    range: Interval

    def __post_init__(self):
        if self.from_vertex is WILDCARD and self.to_vertex is WILDCARD:
            raise ConstraintError("motion constraint needs at least one concrete endpoint")
        _check_range(self.range)

    def matches(self, a: Action) -> bool:
        return (
            a.is_move
            and (self.from_vertex is WILDCARD or a.from_vertex == self.from_vertex)
            and (self.to_vertex is WILDCARD or a.to_vertex == self.to_vertex)
        )

    def forbids(self, a: Action) -> bool:
        return self.matches(a) and self.range.contains(a.start)

    def __str__(self) -> str:
        f = "*" if self.from_vertex is WILDCARD else self.from_vertex
        t = "*" if self.to_vertex is WILDCARD else self.to_vertex
        return f"MC({self.agent}, {f}->{t}, {self.range})"


@dataclass(frozen=True)
class WaitConstraint:
    """Forbids ``agent`` from any wait at ``vertex`` that overlaps ``range``."""

    agent: int
    vertex: Vertex
    range: Interval

    def __post_init__(self):
        _check_range(self.range)

    def forbids(self, a: Action) -> bool:
        if not (a.is_wait and a.from_vertex == self.vertex):
            return False
        return overlap(occupancy(a)[0][1], self.range)

    def __str__(self) -> str:
        return f"WC({self.agent}, {self.vertex}, {self.range})"


@dataclass(frozen=True)
class OccupancyConstraint:
    """Forbids ``agent`` from any action that occupies ``vertex`` at instant ``at``."""

    agent: int
    vertex: Vertex
    at: Time

    def __post_init__(self):
        if self.at == INF:
            raise ConstraintError("occupancy constraint must be at a finite time")

    def forbids(self, a: Action) -> bool:
        return any(v == self.vertex and iv.contains(self.at) for v, iv in occupancy(a))

    def __str__(self) -> str:
        return f"OC({self.agent}, {self.vertex}, {fmt_exact(self.at)})"


Constraint = Union[MotionConstraint, WaitConstraint, OccupancyConstraint]


def _check_range(r: Interval) -> None:
    if not (r.lo_closed and not r.hi_closed and r.lo < r.hi):
        raise ConstraintError(f"constraint range must be [l, r) with l < r, got {r}")


def canonical_actions(path: Path) -> list[Action]:
    """The path's moves plus one wait per stay, zero-length stays included."""
    agent = path.agent
    out = [Action.wait(agent, v, a, b) for v, a, b in dwells(path)]
    out.extend(a for a in path.actions if a.is_move)
    return out


def violations(path: Path, constraints: Sequence[Constraint]) -> list[tuple[Constraint, Action]]:
    """Every (constraint, action) pair where the path breaks a constraint."""
    acts = canonical_actions(path)
    return [(c, a) for c in constraints for a in acts if c.agent == a.agent and c.forbids(a)]


def violates(path: Path, c: Constraint) -> bool:
    return bool(violations(path, [c]))


@dataclass(frozen=True)
class Branch:
    """Constraints added to one agent in one child of a conflict."""

    agent: int
    constraints: tuple
    fallback: bool = False

    def __post_init__(self):
        if not self.constraints:
            raise ConstraintError("branch must hold at least one constraint")
        if any(c.agent != self.agent for c in self.constraints):
            raise ConstraintError("all constraints of a branch must target its agent")

    def __iter__(self):
        return iter(self.constraints)

    def forbids(self, a: Action) -> bool:
        return any(c.forbids(a) for c in self.constraints)

    def __str__(self) -> str:
        return " & ".join(str(c) for c in self.constraints)


# -- CSA ----------------------------------------------------------------------


def _csa_branches(c: Conflict) -> tuple[Branch, Branch]:
    ai, aj = c.action_i, c.action_j
    i, j = ai.agent, aj.agent
    if c.kind is ConflictKind.WAIT_IN:
        tr = min(ai.end, aj.end)
        return (
            Branch(i, (OccupancyConstraint(i, c.vertex, tr),)),
            Branch(j, (OccupancyConstraint(j, c.vertex, tr),)),
        )
    if ai.start < aj.end and aj.start < ai.end:
        return (
            Branch(i, (MotionConstraint(i, ai.from_vertex, ai.to_vertex, _half_open(ai.start, aj.end)),)),
            Branch(j, (MotionConstraint(j, aj.from_vertex, aj.to_vertex, _half_open(aj.start, ai.end)),)),
        )
    # the two occupancies share a single instant; pin both agents off it
    t = c.time
    return (
        Branch(i, (OccupancyConstraint(i, c.vertex, t),)),
        Branch(j, (OccupancyConstraint(j, c.vertex, t),)),
    )


def gen_csa(c: Conflict) -> tuple[Branch, Branch]:
    """Constraints on the single conflicting actions: ``(branch_i, branch_j)``."""
    return _csa_branches(c)


# -- CMA ----------------------------------------------------------------------


def _cma_ranges(c: Conflict, vt: VertexTiming):
    """Raw (unchecked) CMA constraints as ``(spec_i, spec_j)``.

    Each spec is a list of ``(kind, lo, hi)`` with kind ``"in"``, ``"out"`` or
    ``"wait"``.
    """
    ai, aj, v = c.action_i, c.action_j, c.vertex
    i, j = ai.agent, aj.agent
    in_i, out_i = vt.in_(i, v), vt.out(i, v)
    in_j, out_j = vt.in_(j, v), vt.out(j, v)
    t1i, t1j, t2j = ai.start, aj.start, aj.end
    if c.kind is ConflictKind.IN_IN:
        return [("in", t1i, t1j + in_j + out_j)], [("in", t1j, t1i + in_i + out_i)]
    if c.kind is ConflictKind.OUT_IN:
        hi_j = t1i + in_i + out_i + in_j
        return [("in", t1i, t1j + out_j)], [("wait", t1j, hi_j), ("out", t1j, hi_j)]
    r_j = t1i + in_i + out_i + in_j
    if t2j < r_j:
        return [("in", t1i, t2j + out_j)], [("wait", t2j, r_j)]
    split = t1i + in_i + out_i
    return [("in", t1i, split + out_j)], [("wait", split, r_j)]


def _materialize(agent: int, v: Vertex, spec) -> tuple | None:
    out = []
    for kind, lo, hi in spec:
        if not lo < hi:
            return None
        rng = Interval(lo, hi, True, False)
        if kind == "in":
            out.append(MotionConstraint(agent, WILDCARD, v, rng))
        elif kind == "out":
            out.append(MotionConstraint(agent, v, WILDCARD, rng))
        else:
            out.append(WaitConstraint(agent, v, rng))
    return tuple(out)


def gen_cma(c: Conflict, vt: VertexTiming) -> tuple[Branch, Branch]:
    """Constraints on multiple actions at the conflict vertex: ``(branch_i, branch_j)``."""
    spec_i, spec_j = _cma_ranges(c, vt)
    csa_i, csa_j = _csa_branches(c)
    out = []
    for agent, own, spec, csa in (
        (c.agent_i, c.action_i, spec_i, csa_i),
        (c.agent_j, c.action_j, spec_j, csa_j),
    ):
        cons = _materialize(agent, c.vertex, spec)
        if cons is None or not any(k.forbids(own) for k in cons):
            out.append(Branch(agent, csa.constraints, fallback=True))
        else:
            out.append(Branch(agent, cons))
    return out[0], out[1]


def generate(c: Conflict, strategy: str, vt: VertexTiming | None = None) -> tuple[Branch, Branch]:
    if strategy == "csa":
        return gen_csa(c)
    if strategy == "cma":
        if vt is None:
            raise ValueError("CMA needs vertex timings")
        return gen_cma(c, vt)
    raise ValueError(f"unknown constraint strategy {strategy!r}")


# -- Edge subdivision -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Subdivision:
    """An instance with long edges split, plus the origin of each new vertex."""

    instance: Instance
    origin: dict = field(default_factory=dict)

    def label(self, v: Vertex):
        """Human-readable name for ``v``; intermediate vertices name their edge."""
        if v in self.origin:
            u, w, k, n = self.origin[v]
            return f"{u}~{w}#{k}/{n}"
        return v


def subdivide_edges(inst: Instance) -> Subdivision:
    """Split every edge into unit segments so each agent has one edge duration.

    Requires every agent's durations to be integer multiples of that agent's
    shortest duration, with the same multiplier on each edge for all agents.
    """
    if inst.num_agents == 0:
        return Subdivision(inst)
    base = []
    for i, table in enumerate(inst.durations):
        if not table:
            base.append(None)
            continue
        base.append(min(table.values()))
    multiples = {}
    for u, w in inst.edges():
        pattern = None
        for i, table in enumerate(inst.durations):
            ratio = Fraction(table[(u, w)]) / Fraction(base[i])
            if ratio.denominator != 1:
                raise InstanceError(
                    f"agent {i}: duration of {u!r}-{w!r} is not a multiple of its shortest edge"
                )
            if pattern is None:
                pattern = ratio.numerator
            elif pattern != ratio.numerator:
                raise InstanceError(f"edge {u!r}-{w!r}: length pattern differs between agents")
        multiples[(u, w)] = pattern
    if all(k == 1 for k in multiples.values()):
        return Subdivision(inst)
    edges = []
    origin = {}
    for (u, w), k in multiples.items():
        if k == 1:
            edges.append((u, w))
            continue
        chain = [u]
        for s in range(1, k):
            mid = ("sub", u, w, s)
            origin[mid] = (u, w, s, k)
            chain.append(mid)
        chain.append(w)
        edges.extend(zip(chain, chain[1:]))
    new = Instance.build(
        edges,
        inst.starts,
        inst.goals,
        [base[i] for i in range(inst.num_agents)],
        vertices=inst.vertices,
        name=inst.name,
        labels=inst.labels,
    )
    return Subdivision(new, origin)


# -- Mutual disjunction check ----------------------------------------------------


@dataclass(frozen=True)
class Probe:
    """Local neighbourhood of a vertex used to enumerate single visits of agents.

    ``in_edges[k]`` / ``out_edges[k]`` list ``(neighbour, duration)`` for
    agent ``k``.  Entry times and wait lengths are sampled on multiples of
    ``step``; ``horizon`` (default: the largest finite constraint endpoint)
    bounds both.  Agents in ``start_agents`` may also begin at the vertex.
    """

    vertex: Vertex
    in_edges: dict
    out_edges: dict
    step: Time = Fraction(1, 2)
    horizon: Time | None = None
    start_agents: frozenset = frozenset()

    @classmethod
    def around(cls, inst: Instance, v: Vertex, step=Fraction(1, 2), horizon=None, agents=None) -> "Probe":
        agents = range(inst.num_agents) if agents is None else agents
        ins, outs = {}, {}
        nbrs = sorted(inst.adjacency[v], key=vertex_sort_key)
        for k in agents:
            ins[k] = [(u, inst.durations[k][(u, v)]) for u in nbrs]
            outs[k] = [(u, inst.durations[k][(v, u)]) for u in nbrs]
        return cls(v, ins, outs, step, horizon, frozenset(agents))


class Visit:
    """One stay at the probe vertex: optional entry move, a wait, optional exit move."""

    __slots__ = ("actions", "span")

    def __init__(self, agent, v, entry, wait, exit_):
        acts = []
        if entry is None:
            arrive, lo, lo_closed = 0, 0, True
        else:
            u, x, d = entry
            arrive, lo, lo_closed = x + d, x, False
            acts.append(Action.move(agent, u, v, x, arrive))
        leave = arrive + wait
        acts.append(Action.wait(agent, v, arrive, leave))
        if exit_ is None:
            hi = INF
        else:
            w, d = exit_
            hi = leave + d
            acts.append(Action.move(agent, v, w, leave, hi))
        self.actions = acts
        self.span = Interval(lo, hi, lo_closed, False)

    def breaks(self, branch: Branch) -> bool:
        return any(branch.forbids(a) for a in self.actions)


def _horizon(probe: Probe, branches) -> Time:
    if probe.horizon is not None:
        return probe.horizon
    top = 0
    for b in branches:
        for c in b.constraints:
            if isinstance(c, OccupancyConstraint):
                top = max(top, c.at)
            elif c.range.hi != INF:
                top = max(top, c.range.hi)
            else:
                top = max(top, c.range.lo)
    return top + probe.step


def _grid(step, horizon) -> list:
    n = int(Fraction(horizon) / Fraction(step))
    return [normalize(Fraction(k * step)) for k in range(n + 1)]


def _visits_at(agent, probe: Probe, x, waits):
    """Visits entering at ``x`` (or starting at the vertex when ``x is None``)."""
    v = probe.vertex
    entries = [None] if x is None else [(u, x, d) for u, d in probe.in_edges.get(agent, ())]
    outs = probe.out_edges.get(agent, ())
    for entry in entries:
        for wait in waits:
            if wait == INF:
                yield Visit(agent, v, entry, INF, None)
            else:
                for w, d in outs:
                    yield Visit(agent, v, entry, wait, (w, d))


def _earliest_end(branch: Branch, probe: Probe, grid, waits) -> Interval | None:
    """Span of a violating visit that ends first (open ends preferred on ties)."""
    agent, v = branch.agent, probe.vertex
    entries = [(u, x, d) for x in grid for u, d in probe.in_edges.get(agent, ())]
    if agent in probe.start_agents:
        entries.append(None)
    outs = probe.out_edges.get(agent, ())
    finite = waits[:-1]
    order = []
    for e in entries:
        arrive = 0 if e is None else e[1] + e[2]
        for wait in finite:
            for o in outs:
                order.append((arrive + wait + o[1], e is not None, e, wait, o))
    order.sort(key=lambda r: (r[0], r[1]))
    for _, _, e, wait, o in order:
        vis = Visit(agent, v, e, wait, o)
        if vis.breaks(branch):
            return vis.span
    return None


def _latest_start(branch: Branch, probe: Probe, grid, waits) -> Interval | None:
    """Span of a violating visit that starts last."""
    agent = branch.agent
    for x in reversed(grid):
        for vis in _visits_at(agent, probe, x, waits):
            if vis.breaks(branch):
                return vis.span
    if agent in probe.start_agents:
        for vis in _visits_at(agent, probe, None, waits):
            if vis.breaks(branch):
                return vis.span
    return None


def find_md_witness(b_i: Branch, b_j: Branch, probe: Probe):
    """Two visits, one per agent, that do not overlap in time yet break ``b_i`` and ``b_j``.

    Returns ``(span_i, span_j)`` or None.  A disjoint pair exists iff one
    side's earliest-ending violating visit ends no later than the other side's
    latest-starting one begins, so only those extremes are searched for.
    """
    horizon = _horizon(probe, (b_i, b_j))
    grid = _grid(probe.step, horizon)
    waits = grid + [INF]
    for first, second in ((b_i, b_j), (b_j, b_i)):
        early = _earliest_end(first, probe, grid, waits)
        if early is None:
            return None
        late = _latest_start(second, probe, grid, waits)
        if late is None:
            return None
        if not overlap(early, late):
            return (early, late) if first is b_i else (late, early)
    return None


def is_mutually_disjunctive(b_i: Branch, b_j: Branch, probe: Probe) -> bool:
    """Brute-force check that no conflict-free pair of visits violates both branches."""
    return find_md_witness(b_i, b_j, probe) is None
