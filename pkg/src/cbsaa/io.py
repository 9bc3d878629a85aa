"""JSON encodings of solutions and solver statistics."""

from __future__ import annotations

from fractions import Fraction

from .highlevel import SolveResult
from .model import Action, Instance, Path
from .timebase import INF, as_time, fmt_exact


def grid_encoder(inst: Instance):
    """Vertex -> JSON value: the ``[x, y]`` label when the instance has one."""

    def enc(v):
        lab = inst.labels.get(v)
        if isinstance(lab, tuple):
            return list(lab)
        return lab if lab is not None else v

    return enc


def action_to_json(a: Action, enc) -> dict:
    return {
        "kind": a.kind.value,
        "from": enc(a.from_vertex),
        "to": enc(a.to_vertex),
        "start": fmt_exact(a.start),
        "end": fmt_exact(a.end),
    }


def action_from_json(agent: int, rec: dict, dec) -> Action:
    start = as_time(rec["start"])
    end = INF if rec["end"] == "inf" else as_time(rec["end"])
    return Action(agent, dec(rec["from"]), dec(rec["to"]), start, end)


def solution_to_json(inst: Instance, result: SolveResult, algo: str, speeds=None, enc=None) -> dict:
    enc = enc or grid_encoder(inst)
    agents = []
    for k in range(inst.num_agents):
        rec = {"id": k, "start": enc(inst.starts[k]), "goal": enc(inst.goals[k])}
        if speeds is not None:
            rec["speed"] = speeds[k]
        d = inst.uniform_duration(k)
        if d is not None:
            rec["duration"] = fmt_exact(d)
        if result.solution is not None:
            path = result.solution[k]
            rec["cost"] = fmt_exact(path.cost)
            rec["actions"] = [action_to_json(a, enc) for a in path.actions]
        agents.append(rec)
    return {
        "map": inst.name,
        "algo": algo,
        "outcome": result.outcome.value,
        "soc": None if result.soc is None else fmt_exact(result.soc),
        "agents": agents,
    }


def paths_from_json(doc: dict, dec) -> list[Path]:
    out = []
    for rec in doc["agents"]:
        k = rec["id"]
        out.append(Path(tuple(action_from_json(k, a, dec) for a in rec.get("actions", ()))))
    return out


def agent_durations(doc: dict) -> list:
    """Per-agent uniform edge durations recorded in a solution document."""
    out = []
    for rec in doc["agents"]:
        if "duration" in rec:
            out.append(as_time(rec["duration"]))
        elif "speed" in rec:
            out.append(Fraction(1, int(rec["speed"])))
        else:
            raise ValueError(f"agent {rec['id']}: neither duration nor speed recorded")
    return out


def stats_to_json(result: SolveResult) -> dict:
    s = result.stats
    return {
        "expansions": s.expansions,
        "generations": s.generations,
        "lowlevel_calls": s.lowlevel_calls,
        "soc": None if result.soc is None else fmt_exact(result.soc),
        "wall_ms": round(s.wall_ms, 3),
        "outcome": result.outcome.value,
    }
