import pytest

from aus.constructor import ConstructionParams, construct_system
from aus.groups import parse_group
from aus.selftest import constant_one


@pytest.fixture(scope="session")
def circle_bundle():
    """f0 = 1 on the circle, eps = (0.5, 0.25, 0.125)."""
    g = parse_group("circle")
    return construct_system(ConstructionParams(g, constant_one(g), [0.5, 0.25, 0.125]))


def pytest_configure(config):
    config._aus_criteria = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line; the test still asserts on its own."""
    lines = request.config._aus_criteria

    def record(n, ok, detail):
        lines[n] = f"CRITERION {n}: {'PASS' if ok else 'FAIL'}  {detail}"
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = getattr(config, "_aus_criteria", {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
