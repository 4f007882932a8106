import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from tgraph.fixtures import get_fixture
from tgraph.tiling import build_graph

settings.register_profile("tgraph", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("tgraph")

QUAD_FIXTURES = ("SQ2", "SQ3", "PIN5", "TRI4")


@pytest.fixture(scope="session")
def fixture_tilings():
    return {name: get_fixture(name) for name in ("SQ2", "SQ3", "PIN5", "TRI4", "HEX4")}


@pytest.fixture(scope="session")
def fixture_graphs(fixture_tilings):
    return {name: build_graph(t) for name, t in fixture_tilings.items()}


@pytest.fixture
def rng():
    return np.random.default_rng(20241015)


_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and report.when == "call":
        _ACCEPTANCE[report.nodeid.split("::")[-1]] = report.outcome
    elif "test_acceptance.py" in report.nodeid and report.when == "setup" and report.outcome != "passed":
        _ACCEPTANCE[report.nodeid.split("::")[-1]] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE, key=lambda n: int(n.split("_")[1])):
        verdict = "PASS" if _ACCEPTANCE[name] == "passed" else "FAIL"
        terminalreporter.write_line(f"{verdict}  {name}")
