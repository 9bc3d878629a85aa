import random
from fractions import Fraction as F

import pytest

from cbsaa.conflicts import Conflict, ConflictKind, classify
from cbsaa.constraints import (
    Branch,
    ConstraintError,
    MotionConstraint,
    OccupancyConstraint,
    Probe,
    WaitConstraint,
    canonical_actions,
    find_md_witness,
    gen_cma,
    gen_csa,
    is_mutually_disjunctive,
    subdivide_edges,
    violations,
)
from cbsaa.model import Action, Instance, InstanceError, make_path, occupancy_at, vertex_timing
from cbsaa.timebase import INF, Interval

from support import random_conflict, star


def conflict(a1, a2, v):
    kind, ai, aj = classify(a1, a2, v)
    return Conflict(ai, aj, v, kind, max(occupancy_at(ai, v).lo, occupancy_at(aj, v).lo))


def only(branch):
    assert len(branch.constraints) == 1
    return branch.constraints[0]


def test_constraint_ranges_validated():
    with pytest.raises(ConstraintError):
        MotionConstraint(0, "a", "b", Interval.closed(0, 1))
    with pytest.raises(ConstraintError):
        MotionConstraint(0, None, None, Interval(0, 1))
    with pytest.raises(ConstraintError):
        OccupancyConstraint(0, "a", INF)
    with pytest.raises(ConstraintError):
        Branch(0, ())


def test_csa_out_in_on_toy(toy):
    # toy agent 1 leaves D for E over [0,2] while agent 0 leaves E for B over [0,1]
    c = conflict(Action.move(1, "D", "E", 0, 2), Action.move(0, "E", "B", 0, 1), "E")
    bi, bj = gen_csa(c)
    assert only(bi) == MotionConstraint(1, "D", "E", Interval(0, 1))
    assert only(bj) == MotionConstraint(0, "E", "B", Interval(0, 2))


def test_csa_wait_in_on_toy():
    c = conflict(Action.move(2, "C", "D", 0, 3), Action.wait(1, "D", 0), "D")
    bi, bj = gen_csa(c)
    assert only(bi) == OccupancyConstraint(2, "D", 3)
    assert only(bj) == OccupancyConstraint(1, "D", 3)


def test_csa_in_in_symmetric():
    inst = Instance.build([("a", "v"), ("b", "v")], ["a", "b"], ["b", "a"], [2, 2])
    c = conflict(Action.move(0, "a", "v", 1, 3), Action.move(1, "b", "v", 1, 3), "v")
    bi, bj = gen_csa(c)
    assert only(bi).range == only(bj).range == Interval(1, 3)


def test_cma_wait_in_long_wait_splits(toy):
    vt = vertex_timing(toy)
    c = conflict(Action.move(2, "C", "D", 0, 3), Action.wait(1, "D", 0), "D")
    bi, bj = gen_cma(c, vt)
    assert only(bi) == MotionConstraint(2, None, "D", Interval(0, 8))
    assert only(bj) == WaitConstraint(1, "D", Interval(6, 8))
    assert not (bi.fallback or bj.fallback)


def test_cma_wait_in_short_wait(toy):
    vt = vertex_timing(toy)
    c = conflict(Action.move(2, "C", "D", 0, 3), Action.wait(1, "D", 0, 1), "D")
    bi, bj = gen_cma(c, vt)
    assert only(bi) == MotionConstraint(2, None, "D", Interval(0, 3))
    assert only(bj) == WaitConstraint(1, "D", Interval(1, 8))


def test_cma_out_in_emits_wait_and_exit(toy):
    vt = vertex_timing(toy)
    c = conflict(Action.move(1, "E", "D", 6, 8), Action.move(2, "D", "A", 6, 9), "D")
    bi, bj = gen_cma(c, vt)
    assert only(bi) == MotionConstraint(1, None, "D", Interval(6, 9))
    assert set(bj.constraints) == {
        WaitConstraint(2, "D", Interval(6, 13)),
        MotionConstraint(2, "D", None, Interval(6, 13)),
    }


def long_edge_instance():
    # agent 0 crosses the long edge A-B (6); B's other edge costs it 2.  agent 1 uses D-B (1).
    return Instance.build(
        [("A", "B"), ("B", "C"), ("D", "B")],
        ["A", "D"],
        ["C", "A"],
        [{("A", "B"): 6, ("B", "C"): 2, ("D", "B"): 2}, 1],
    )


def test_cma_invalid_range_falls_back_to_csa():
    inst = long_edge_instance()
    vt = vertex_timing(inst)
    c = conflict(Action.move(0, "A", "B", 5, 11), Action.move(1, "D", "B", F(21, 2), F(23, 2)), "B")
    assert c.kind is ConflictKind.IN_IN
    bi, bj = gen_cma(c, vt)
    # the raw j-range would be [10.5, 5 + 2 + 2) = [10.5, 9)
    assert bj.fallback
    assert only(bj) == MotionConstraint(1, "D", "B", Interval(F(21, 2), 11))
    assert not bi.fallback
    assert only(bi) == MotionConstraint(0, None, "B", Interval(5, F(21, 2) + 2))


def test_every_branch_forbids_own_action():
    rng = random.Random(7)
    for _ in range(300):
        _, c, vt, _ = random_conflict(rng)
        for bi, bj in (gen_csa(c), gen_cma(c, vt)):
            assert bi.forbids(c.action_i) and bj.forbids(c.action_j)
            for b in (bi, bj):
                for k in b.constraints:
                    if not isinstance(k, OccupancyConstraint):
                        assert k.range.lo < k.range.hi


def test_cma_ranges_valid_under_uniform_durations():
    rng = random.Random(11)
    for _ in range(300):
        _, c, vt, _ = random_conflict(rng)
        bi, bj = gen_cma(c, vt)
        assert not bi.fallback and not bj.fallback


def test_md_on_random_conflicts():
    rng = random.Random(3)
    for _ in range(150):
        _, c, vt, probe = random_conflict(rng)
        assert is_mutually_disjunctive(*gen_csa(c), probe)
        assert is_mutually_disjunctive(*gen_cma(c, vt), probe)


def test_md_checker_finds_planted_counterexample():
    inst = star(1, 1)
    probe = Probe.around(inst, "v", step=1)
    bi = Branch(0, (MotionConstraint(0, None, "v", Interval(0, 1)),))
    bj = Branch(1, (MotionConstraint(1, None, "v", Interval(10, 11)),))
    assert not is_mutually_disjunctive(bi, bj, probe)
    span_i, span_j = find_md_witness(bi, bj, probe)
    assert span_i.hi <= span_j.lo


def test_md_checker_catches_overlong_ranges():
    # stretching the IN-IN ranges past the partner's minimal stay breaks MD
    rng = random.Random(5)
    caught = 0
    for _ in range(200):
        _, c, vt, probe = random_conflict(rng)
        if c.kind is not ConflictKind.IN_IN:
            continue
        bi, bj = gen_cma(c, vt)
        stretch = [
            Branch(b.agent, (MotionConstraint(b.agent, None, "v", Interval(k.range.lo, k.range.hi + 3)),))
            for b in (bi, bj)
            for k in b.constraints
        ]
        caught += not is_mutually_disjunctive(stretch[0], stretch[1], probe)
    assert caught > 0


def test_violations_cover_implicit_waits():
    p = make_path(0, "a", [(0, "v", 1), (1, "b", 2)])
    # passing through v at t=1 is a zero-length stay
    assert violations(p, [WaitConstraint(0, "v", Interval(1, 2))])
    assert not violations(p, [WaitConstraint(0, "v", Interval(2, 3))])
    assert violations(p, [OccupancyConstraint(0, "v", F(1, 2))])
    assert violations(p, [MotionConstraint(0, "v", None, Interval(1, 2))])
    assert len(canonical_actions(p)) == 5


def test_subdivide_double_edge():
    inst = Instance.build(
        [("a", "b"), ("b", "c")], ["a", "c"], ["c", "a"], [{("a", "b"): 2, ("b", "c"): 1}, {("a", "b"): 6, ("b", "c"): 3}]
    )
    sub = subdivide_edges(inst)
    new = sub.instance
    assert len(new.vertices) == 4
    assert set(new.durations[0].values()) == {1}
    assert set(new.durations[1].values()) == {3}
    (mid,) = sub.origin
    assert sub.origin[mid][:2] == ("a", "b")
    assert isinstance(sub.label(mid), str)


def test_subdivide_noop_on_uniform():
    inst = star(1, F(1, 3))
    assert subdivide_edges(inst).instance is inst


def test_subdivide_rejects_mismatched_patterns():
    inst = Instance.build(
        [("a", "b"), ("b", "c")], ["a", "c"], ["c", "a"], [{("a", "b"): 2, ("b", "c"): 1}, {("a", "b"): 1, ("b", "c"): 1}]
    )
    with pytest.raises(InstanceError):
        subdivide_edges(inst)
    inst = Instance.build([("a", "b"), ("b", "c")], ["a"], ["c"], [{("a", "b"): 3, ("b", "c"): 2}])
    with pytest.raises(InstanceError):
        subdivide_edges(inst)
