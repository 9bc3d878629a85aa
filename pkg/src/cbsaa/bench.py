"""Heterogeneous-speed grid scenarios and the benchmark sweep."""

from __future__ import annotations

import csv
import io
import logging
import random
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path as FsPath
from typing import Iterable, Sequence

from .highlevel import Mode, Outcome, SolveResult, solve
from .model import Instance
from .movingai import Grid, ScenRow, load_map, parse_scen
from .oracle import oracle_solve
from .timebase import fmt_exact

log = logging.getLogger(__name__)

RUN_COLUMNS = ["map", "N", "mode", "seed", "outcome", "soc", "expansions", "lowlevel_calls", "wall_ms"]
SUMMARY_COLUMNS = [
    "map",
    "N",
    "mode",
    "runs",
    "solved",
    "success_rate",
    "common",
    "min_expansions",
    "avg_expansions",
    "max_expansions",
]
MODES = ("csa", "cma", "cmas", "oracle")


def gen_speeds(n: int, seed: int, low: int = 1, high: int = 20) -> list[int]:
    """``n`` integer speeds drawn uniformly from ``low..high``."""
    if n < 1:
        raise ValueError("need at least one agent")
    rng = random.Random(seed)
    return [rng.randint(low, high) for _ in range(n)]


def random_tasks(grid: Grid, n: int, seed: int) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Distinct starts and distinct goals inside the largest connected region."""
    cells = grid.components()[0] if grid.vertices() else []
    if n > len(cells):
        raise ValueError(f"{n} agents do not fit in {len(cells)} connected cells")
    rng = random.Random(f"tasks:{seed}")
    starts = rng.sample(cells, n)
    goals = rng.sample(cells, n)
    return [(grid.cell(s), grid.cell(g)) for s, g in zip(starts, goals)]


@dataclass(frozen=True)
class Scenario:
    map_name: str
    grid: Grid
    tasks: tuple  # ((sx, sy), (gx, gy)) per agent
    speeds: tuple
    seed: int

    def instance(self) -> Instance:
        g = self.grid
        for (s, t), speed in zip(self.tasks, self.speeds):
            for x, y in (s, t):
                if not g.passable(x, y):
                    raise ValueError(f"cell ({x}, {y}) is not passable")
            if not 1 <= speed:
                raise ValueError(f"speed {speed} out of range")
        return Instance.build(
            g.edges(),
            [g.vertex(*s) for s, _ in self.tasks],
            [g.vertex(*t) for _, t in self.tasks],
            [Fraction(1, s) for s in self.speeds],
            vertices=g.vertices(),
            name=self.map_name,
            labels={v: g.cell(v) for v in g.vertices()},
        )


def scenario(
    grid: Grid,
    n: int,
    seed: int,
    scen: Sequence[ScenRow] | None = None,
    speeds: Sequence[int] | None = None,
    shuffle_tasks: int | None = None,
    max_speed: int = 20,
) -> Scenario:
    """Tasks from ``scen`` (first ``n`` rows, optionally shuffled) or from the seed; speeds from the seed."""
    if scen is not None:
        rows = list(scen)
        if shuffle_tasks is not None:
            random.Random(shuffle_tasks).shuffle(rows)
        if len(rows) < n:
            raise ValueError(f"scenario has {len(rows)} rows, {n} requested")
        tasks = tuple((r.start, r.goal) for r in rows[:n])
    else:
        tasks = tuple(random_tasks(grid, n, seed))
    if speeds is None:
        speeds = gen_speeds(n, seed, 1, max_speed)
    elif len(speeds) < n:
        raise ValueError(f"{len(speeds)} speeds given for {n} agents")
    return Scenario(grid.name, grid, tasks, tuple(speeds[:n]), seed)


def run_solver(inst: Instance, mode: str, time_limit: float | None, node_limit: int | None = None) -> SolveResult:
    if mode == "oracle":
        return oracle_solve(inst, time_limit=time_limit, node_limit=node_limit)
    return solve(inst, Mode.parse(mode), time_limit=time_limit, node_limit=node_limit)


@dataclass(frozen=True)
class RunRecord:
    map: str
    N: int
    mode: str
    seed: int
    outcome: str
    soc: str
    expansions: int
    lowlevel_calls: int
    wall_ms: float

    def row(self, omit_wall_time: bool = False) -> list:
        wall = "" if omit_wall_time else f"{self.wall_ms:.1f}"
        return [self.map, self.N, self.mode, self.seed, self.outcome, self.soc, self.expansions,
                self.lowlevel_calls, wall]


def _run_job(job) -> RunRecord:
    map_spec, n, mode, seed, time_limit, node_limit, scen_text, max_speed = job
    grid = load_map(map_spec)
    scen = parse_scen(scen_text, grid) if scen_text is not None else None
    sc = scenario(grid, n, seed, scen, max_speed=max_speed)
    try:
        res = run_solver(sc.instance(), mode, time_limit, node_limit)
    except Exception as exc:  # recorded, never fatal to the sweep
        log.warning("run %s N=%d %s seed=%d failed: %s", grid.name, n, mode, seed, exc)
        return RunRecord(grid.name, n, mode, seed, "error", "", 0, 0, 0.0)
    soc = fmt_exact(res.soc) if res.soc is not None else ""
    s = res.stats
    return RunRecord(grid.name, n, mode, seed, res.outcome.value, soc, s.expansions, s.lowlevel_calls, s.wall_ms)


def run_bench(
    maps: Iterable[str],
    agent_counts: Iterable[int],
    modes: Iterable[str],
    seeds: Iterable[int],
    time_limit: float | None = 30.0,
    node_limit: int | None = None,
    scen_files: dict | None = None,
    workers: int = 1,
    max_speed: int = 20,
) -> list[RunRecord]:
    """One record per (map, N, mode, seed), in that sort order whatever the worker count."""
    modes = [m.lower() for m in modes]
    for m in modes:
        if m not in MODES:
            raise ValueError(f"unknown mode {m!r}")
    scen_files = scen_files or {}
    jobs = []
    for map_spec in maps:
        scen_path = scen_files.get(map_spec)
        scen_text = FsPath(scen_path).read_text() if scen_path else None
        for n in agent_counts:
            for mode in modes:
                for seed in seeds:
                    jobs.append((map_spec, n, mode, seed, time_limit, node_limit, scen_text, max_speed))
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            records = list(pool.map(_run_job, jobs))
    else:
        records = [_run_job(j) for j in jobs]
    order = {m: k for k, m in enumerate(modes)}
    records.sort(key=lambda r: (r.map, r.N, order[r.mode], r.seed))
    return records


def runs_csv(records: Sequence[RunRecord], omit_wall_time: bool = False) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RUN_COLUMNS)
    for r in records:
        w.writerow(r.row(omit_wall_time))
    return buf.getvalue()


def read_runs_csv(text: str) -> list[RunRecord]:
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        out.append(
            RunRecord(
                row["map"],
                int(row["N"]),
                row["mode"],
                int(row["seed"]),
                row["outcome"],
                row["soc"],
                int(row["expansions"]),
                int(row["lowlevel_calls"]),
                float(row["wall_ms"]) if row["wall_ms"] else 0.0,
            )
        )
    return out


def common_solved(records: Sequence[RunRecord]) -> set:
    """(map, N, seed) keys solved by every mode present for that (map, N)."""
    modes_for: dict = {}
    solved: dict = {}
    for r in records:
        key = (r.map, r.N)
        modes_for.setdefault(key, set()).add(r.mode)
        if r.outcome == Outcome.SOLVED.value:
            solved.setdefault((r.map, r.N, r.seed), set()).add(r.mode)
    return {k for k, ms in solved.items() if ms >= modes_for[(k[0], k[1])]}


def summarize(records: Sequence[RunRecord]) -> list[dict]:
    common = common_solved(records)
    groups: dict = {}
    for r in records:
        groups.setdefault((r.map, r.N, r.mode), []).append(r)
    out = []
    for (m, n, mode), rs in groups.items():
        solved = [r for r in rs if r.outcome == Outcome.SOLVED.value]
        shared = [r.expansions for r in solved if (m, n, r.seed) in common]
        out.append(
            {
                "map": m,
                "N": n,
                "mode": mode,
                "runs": len(rs),
                "solved": len(solved),
                "success_rate": f"{len(solved) / len(rs):.4f}",
                "common": len(shared),
                "min_expansions": min(shared) if shared else "",
                "avg_expansions": f"{statistics.fmean(shared):.2f}" if shared else "",
                "max_expansions": max(shared) if shared else "",
            }
        )
    return out


def summary_csv(records: Sequence[RunRecord]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, SUMMARY_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(summarize(records))
    return buf.getvalue()
