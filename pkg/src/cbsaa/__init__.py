"""Optimal conflict-based search for multi-agent paths with asynchronous actions."""

from .conflicts import Conflict, ConflictKind, all_conflicts, detect_earliest_conflict, validate
from .constraints import (
    Branch,
    MotionConstraint,
    OccupancyConstraint,
    WaitConstraint,
    gen_cma,
    gen_csa,
    is_mutually_disjunctive,
    subdivide_edges,
)
from .highlevel import Mode, Outcome, SolveResult, solve
from .lowlevel import build_safe_intervals, heuristic, sipp_plan, sipps_wc_plan
from .model import Action, Instance, Path, make_path, sum_of_costs, vertex_timing
from .oracle import oracle_solve
from .timebase import INF, Interval

__all__ = [
    "Action",
    "Branch",
    "Conflict",
    "ConflictKind",
    "INF",
    "Instance",
    "Interval",
    "Mode",
    "MotionConstraint",
    "OccupancyConstraint",
    "Outcome",
    "Path",
    "SolveResult",
    "WaitConstraint",
    "all_conflicts",
    "build_safe_intervals",
    "detect_earliest_conflict",
    "gen_cma",
    "gen_csa",
    "heuristic",
    "is_mutually_disjunctive",
    "make_path",
    "oracle_solve",
    "sipp_plan",
    "sipps_wc_plan",
    "solve",
    "subdivide_edges",
    "sum_of_costs",
    "validate",
    "vertex_timing",
]
