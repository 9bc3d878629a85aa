from collections import Counter
from fractions import Fraction

import pytest

from cbsaa.bench import (
    RUN_COLUMNS,
    common_solved,
    gen_speeds,
    random_tasks,
    read_runs_csv,
    run_bench,
    runs_csv,
    scenario,
    summarize,
)
from cbsaa.highlevel import solve
from cbsaa.movingai import empty_grid, parse_scen

# 99th percentile of chi-square with 19 degrees of freedom
CHI2_19_99 = 36.191


def test_speeds_deterministic():
    assert gen_speeds(10, 3) == gen_speeds(10, 3)
    assert gen_speeds(10, 3) != gen_speeds(10, 4)
    with pytest.raises(ValueError):
        gen_speeds(0, 1)


def test_speeds_uniform():
    draws = []
    for seed in range(1000):
        draws += gen_speeds(10, seed)
    counts = Counter(draws)
    assert set(counts) == set(range(1, 21))
    expected = len(draws) / 20
    chi2 = sum((counts[k] - expected) ** 2 / expected for k in range(1, 21))
    assert chi2 < CHI2_19_99


def test_tasks_distinct_and_connected():
    g = empty_grid(4, 4)
    tasks = random_tasks(g, 6, 1)
    assert len({s for s, _ in tasks}) == 6 and len({t for _, t in tasks}) == 6
    with pytest.raises(ValueError):
        random_tasks(g, 17, 0)


def test_scenario_instance_uses_inverse_speed():
    g = empty_grid(3, 3)
    inst = scenario(g, 2, 0, speeds=[2, 5]).instance()
    assert set(inst.durations[0].values()) == {Fraction(1, 2)}
    assert set(inst.durations[1].values()) == {Fraction(1, 5)}


def test_scen_first_rows_selected():
    g = empty_grid(3, 3)
    text = "version 1\n" + "".join(f"0\tm\t3\t3\t{k}\t0\t{k}\t2\t2\n" for k in range(3))
    rows = parse_scen(text, g)
    sc = scenario(g, 2, 7, rows)
    assert sc.tasks == (((0, 0), (0, 2)), ((1, 0), (1, 2)))
    assert scenario(g, 2, 7, rows) == sc


def test_fifty_rows_and_summary():
    recs = run_bench(["empty-4-4"], [2], ["csa", "cma"], range(25), time_limit=10)
    assert len(recs) == 50
    text = runs_csv(recs)
    assert text.splitlines()[0] == ",".join(RUN_COLUMNS)
    summary = summarize(recs)
    assert [s["mode"] for s in summary] == ["csa", "cma"]
    assert all(s["runs"] == 25 for s in summary)


def test_common_filter_is_subset():
    recs = run_bench(["empty-5-5"], [4], ["csa", "cma", "cmas"], range(6), time_limit=None, node_limit=40)
    common = common_solved(recs)
    for r in recs:
        if (r.map, r.N, r.seed) in common:
            assert r.outcome == "solved"
    by_key = {}
    for r in recs:
        if (r.map, r.N, r.seed) in common:
            by_key.setdefault(r.seed, set()).add(r.soc)
    assert all(len(socs) == 1 for socs in by_key.values())
    for s in summarize(recs):
        assert s["common"] == len(common) <= s["solved"]


def test_csv_round_trip_and_determinism():
    a = run_bench(["empty-4-4"], [3], ["cma"], range(4), time_limit=None)
    b = run_bench(["empty-4-4"], [3], ["cma"], range(4), time_limit=None, workers=2)
    assert runs_csv(a, omit_wall_time=True) == runs_csv(b, omit_wall_time=True)
    assert [r.soc for r in read_runs_csv(runs_csv(a))] == [r.soc for r in a]


def test_time_limit_honoured():
    inst = scenario(empty_grid(16, 16), 12, 5).instance()
    r = solve(inst, "csa", time_limit=1.0)
    assert r.stats.wall_ms < 1500


def test_unknown_mode_rejected():
    with pytest.raises(ValueError):
        run_bench(["empty-4-4"], [2], ["foo"], range(1))
