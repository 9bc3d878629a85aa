import os

import pytest
from hypothesis import HealthCheck, settings

from cbsaa.model import Instance

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def toy_instance(t1=1, t2=2, t3=3):
    """Five vertices: A-D, C-D, D-E, E-B.  Agents 0: E->B, 1: D->D, 2: C->A."""
    return Instance.build(
        [("A", "D"), ("C", "D"), ("D", "E"), ("E", "B")],
        ["E", "D", "C"],
        ["B", "D", "A"],
        [t1, t2, t3],
        name="toy",
    )


@pytest.fixture
def toy():
    return toy_instance()


ACCEPTANCE_LINES: dict = {}


def report(criterion: int, ok: bool, detail: str) -> None:
    """Record the one-line verdict for an acceptance criterion."""
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[criterion] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
