import json
import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("radshock", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("radshock")

DATA = os.path.join(os.path.dirname(__file__), "data", "oracles.json")


@pytest.fixture(scope="session")
def oracles():
    with open(DATA, encoding="utf-8") as fh:
        return json.load(fh)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict():
    """Record and print one PASS/FAIL line, then fail the test if needed."""
    def report(number: int, ok: bool, detail: str):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line
    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
