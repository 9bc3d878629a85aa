"""Shared generators for randomized tests."""

import random

from cbsaa.conflicts import Conflict, classify
from cbsaa.constraints import Probe
from cbsaa.model import Action, Instance, occupancy_at, vertex_timing
from cbsaa.timebase import INF, overlap


def star(tau_i, tau_j):
    """Vertex ``v`` between ``p`` and ``q``; every edge costs agent k ``tau_k``."""
    return Instance.build([("p", "v"), ("v", "q")], ["p", "q"], ["q", "p"], [tau_i, tau_j])


def random_conflict(rng: random.Random):
    """A random overlapping (IN, other) pair at ``v`` on a star with uniform per-agent durations.

    Times are integers (think half-units); the probe samples every integer.
    """
    tau = [rng.randint(1, 6), rng.randint(1, 6)]
    inst = star(*tau)
    i = rng.randint(0, 1)
    j = 1 - i
    ti, tj = tau[i], tau[j]
    xi = rng.randint(0, 12)
    a_i = Action.move(i, rng.choice("pq"), "v", xi, xi + ti)
    kind = rng.choice(["in", "out", "wait"])
    if kind == "in":
        xj = rng.randint(max(0, xi - tj + 1), xi + ti - 1)
        a_j = Action.move(j, rng.choice("pq"), "v", xj, xj + tj)
    elif kind == "out":
        sj = rng.randint(max(0, xi - tj + 1), xi + ti)
        a_j = Action.move(j, "v", rng.choice("pq"), sj, sj + tj)
    else:
        a = rng.randint(0, xi + ti)
        b = INF if rng.random() < 0.3 else max(a, rng.randint(xi + 1, xi + ti + 16))
        a_j = Action.wait(j, "v", a, b)
    oi, oj = occupancy_at(a_i, "v"), occupancy_at(a_j, "v")
    assert overlap(oi, oj), (a_i, a_j)
    k, first, second = classify(a_i, a_j, "v")
    c = Conflict(first, second, "v", k, max(oi.lo, oj.lo))
    return inst, c, vertex_timing(inst), Probe.around(inst, "v", step=1)


def lattice_cost(agent, constraints, inst, horizon, scale=2):
    """Cheapest constrained arrival by uniform-cost search on the 1/scale time lattice.

    Every wait slice and move is checked directly against the constraints, so
    this shares nothing with the safe-interval machinery.  Needs integer
    durations and constraint endpoints.
    """
    import heapq
    from fractions import Fraction

    cons = [c for c in constraints if c.agent == agent]
    step = Fraction(1, scale)

    def ok(a):
        return not any(c.forbids(a) for c in cons)

    start, goal = inst.starts[agent], inst.goals[agent]
    if not ok(Action.wait(agent, start, 0, 0)):
        return None
    heap = [(0, 0, start)]
    seen = set()
    tie = 0
    while heap:
        t, _, v = heapq.heappop(heap)
        if (v, t) in seen or t > horizon:
            continue
        seen.add((v, t))
        if v == goal and ok(Action.wait(agent, v, t, INF)):
            return t
        nxt = t + step
        if ok(Action.wait(agent, v, t, nxt)):
            tie += 1
            heapq.heappush(heap, (nxt, tie, v))
        for w in inst.adjacency[v]:
            d = inst.durations[agent][(v, w)]
            mv = Action.move(agent, v, w, t, t + d)
            if ok(mv) and ok(Action.wait(agent, w, t + d, t + d)):
                tie += 1
                heapq.heappush(heap, (t + d, tie, w))
    return None


def random_graph(rng: random.Random, n=6, extra=3, max_d=3):
    """Connected graph on ``0..n-1``: a random tree plus ``extra`` edges, integer durations."""
    edges = set()
    for v in range(1, n):
        u = rng.randrange(v)
        edges.add((u, v))
    for _ in range(extra):
        u, v = rng.sample(range(n), 2)
        if (u, v) not in edges and (v, u) not in edges:
            edges.add((u, v))
    edges = sorted(edges)
    durs = {e: rng.randint(1, max_d) for e in edges}
    return edges, durs


def random_constraints(rng: random.Random, inst, agent=0, count=None, top=12):
    from cbsaa.constraints import MotionConstraint, OccupancyConstraint, WaitConstraint
    from cbsaa.timebase import Interval

    out = []
    verts = list(inst.adjacency)
    edges = [(u, w) for u in verts for w in inst.adjacency[u]]
    for _ in range(rng.randint(0, 6) if count is None else count):
        lo = rng.randint(0, top)
        hi = lo + rng.randint(1, 6)
        kind = rng.choice(["edge", "in", "out", "wait", "occ"])
        if kind == "edge":
            u, w = rng.choice(edges)
            out.append(MotionConstraint(agent, u, w, Interval(lo, hi)))
        elif kind == "in":
            out.append(MotionConstraint(agent, None, rng.choice(verts), Interval(lo, hi)))
        elif kind == "out":
            out.append(MotionConstraint(agent, rng.choice(verts), None, Interval(lo, hi)))
        elif kind == "wait":
            out.append(WaitConstraint(agent, rng.choice(verts), Interval(lo, hi)))
        else:
            out.append(OccupancyConstraint(agent, rng.choice(verts), lo))
    return out


def random_single_agent(rng: random.Random):
    edges, durs = random_graph(rng, n=rng.randint(4, 7))
    n = max(max(e) for e in edges) + 1
    s, g = rng.sample(range(n), 2) if rng.random() < 0.9 else [0, 0]
    inst = Instance.build(edges, [s], [g], [durs])
    return inst, random_constraints(rng, inst)
