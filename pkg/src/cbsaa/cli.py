"""Command-line entry point: solve, validate, oracle and bench."""

from __future__ import annotations

import argparse
import json
import logging
import os
import re
import sys
from pathlib import Path as FsPath

from . import bench
from .conflicts import validate
from .constraints import subdivide_edges
from .highlevel import Outcome
from .io import agent_durations, grid_encoder, paths_from_json, solution_to_json, stats_to_json
from .model import Instance, InstanceError
from .movingai import FormatError, load_map, parse_scen

EXIT_OK, EXIT_UNSOLVED, EXIT_USAGE, EXIT_TIMEOUT, EXIT_INVALID = 0, 1, 2, 3, 4


def _read_speeds(path: str) -> list[int]:
    text = FsPath(path).read_text().strip()
    values = json.loads(text) if text.startswith("[") else re.split(r"[\s,]+", text)
    speeds = [int(v) for v in values if str(v).strip()]
    if any(s < 1 for s in speeds):
        raise ValueError("speeds must be positive integers")
    return speeds


def _write_json(path: str | None, doc) -> None:
    text = json.dumps(doc, indent=2)
    if path is None or path == "-":
        print(text)
    else:
        FsPath(path).write_text(text + "\n")


def cmd_solve(args, algo: str | None = None) -> int:
    algo = algo or args.algo
    grid = load_map(args.map)
    scen = parse_scen(FsPath(args.scen).read_text(), grid) if args.scen else None
    speeds = _read_speeds(args.speeds) if args.speeds else None
    sc = bench.scenario(grid, args.agents, args.speeds_seed, scen, speeds, args.shuffle_tasks, args.max_speed)
    inst = sc.instance()
    enc = grid_encoder(inst)
    if args.subdivide:
        sub = subdivide_edges(inst)
        inst = sub.instance
        base = enc
        enc = lambda v: base(v) if v not in sub.origin else sub.label(v)  # noqa: E731
    res = bench.run_solver(inst, algo, args.time_limit, args.node_limit)
    doc = solution_to_json(inst, res, algo, list(sc.speeds), enc)
    if args.out:
        _write_json(args.out, doc)
    stats = stats_to_json(res)
    _write_json(args.stats, stats)
    if args.stats:
        print(json.dumps(stats))
    if res.outcome is Outcome.SOLVED:
        return EXIT_OK
    if res.outcome is Outcome.TIMEOUT:
        return EXIT_TIMEOUT
    return EXIT_UNSOLVED


def cmd_validate(args) -> int:
    grid = load_map(args.map)
    doc = json.loads(FsPath(args.solution).read_text())

    def dec(cell):
        x, y = cell
        return grid.vertex(x, y)

    starts = [dec(a["start"]) for a in doc["agents"]]
    goals = [dec(a["goal"]) for a in doc["agents"]]
    inst = Instance.build(
        grid.edges(), starts, goals, agent_durations(doc), vertices=grid.vertices(), name=grid.name,
        labels={v: grid.cell(v) for v in grid.vertices()},
    )
    report = validate(inst, paths_from_json(doc, dec))
    print(json.dumps(report.to_json(grid_encoder(inst)), indent=2))
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_bench(args) -> int:
    maps = [m for m in args.maps.split(",") if m]
    counts = [int(n) for n in args.agents.split(",") if n]
    modes = [m for m in args.algos.split(",") if m]
    scen_files = {}
    for item in args.scen or ():
        name, _, path = item.partition("=")
        scen_files[name] = path
    records = bench.run_bench(
        maps, counts, modes, range(args.seeds), args.time_limit, args.node_limit, scen_files, args.workers,
        args.max_speed,
    )
    FsPath(args.out).write_text(bench.runs_csv(records, args.omit_wall_time))
    if args.summary:
        FsPath(args.summary).write_text(bench.summary_csv(records))
    return EXIT_OK


def _add_instance_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--map", required=True, help="MovingAI .map file, or empty-W-H")
    p.add_argument("--scen", help="MovingAI .scen file (default: random tasks from the seed)")
    p.add_argument("--agents", type=int, required=True)
    p.add_argument("--speeds-seed", type=int, default=0)
    p.add_argument("--speeds", help="file of integer speeds overriding the seed")
    p.add_argument("--max-speed", type=int, default=20)
    p.add_argument("--shuffle-tasks", type=int, metavar="SEED")
    p.add_argument("--time-limit", type=float, default=30.0)
    p.add_argument("--node-limit", type=int)
    p.add_argument("--subdivide", action="store_true", help="split long edges so each agent has one duration")
    p.add_argument("--out", help="solution JSON path")
    p.add_argument("--stats", help="stats JSON path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cbsaa", description="Optimal multi-agent paths with asynchronous actions")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one instance")
    _add_instance_args(p)
    p.add_argument("--algo", choices=["csa", "cma", "cmas", "oracle"], default="cma")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="solve one instance with the exhaustive joint search")
    _add_instance_args(p)
    p.set_defaults(func=lambda a: cmd_solve(a, "oracle"))

    p = sub.add_parser("validate", help="check a solution file for conflicts")
    p.add_argument("--map", required=True)
    p.add_argument("--solution", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("bench", help="run a sweep and write CSV")
    p.add_argument("--maps", required=True, help="comma-separated map files or empty-W-H names")
    p.add_argument("--agents", required=True, help="comma-separated agent counts")
    p.add_argument("--algos", default="csa,cma,cmas")
    p.add_argument("--seeds", type=int, default=25, help="run seeds 0..K-1")
    p.add_argument("--time-limit", type=float, default=30.0)
    p.add_argument("--node-limit", type=int)
    p.add_argument("--scen", action="append", metavar="MAP=FILE", help="scenario file for a map")
    p.add_argument("--max-speed", type=int, default=20)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--omit-wall-time", action="store_true", help="leave wall_ms empty for byte-stable output")
    p.add_argument("--out", required=True)
    p.add_argument("--summary")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("CBSAA_LOG_LEVEL", "WARNING").upper())
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FormatError, InstanceError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
