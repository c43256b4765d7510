from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from support import ACCEPTANCE_LINES, system

settings.register_profile(
    "exact",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("exact")


@pytest.fixture
def A2():
    return system("A2")


@pytest.fixture
def B2():
    return system("B2")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
