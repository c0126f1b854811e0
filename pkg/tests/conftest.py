import numpy as np
import pytest

from sdplift import sdpsolve

WEAK_DUALITY_SLACK = 1e-8

AUDIT = {"solves": 0, "checked": 0, "violations": []}
ACCEPTANCE_LINES: list[str] = []


def _audit(res):
    AUDIT["solves"] += 1
    if res.status == "optimal" and np.isfinite(res.bound):
        AUDIT["checked"] += 1
        if not res.value <= res.bound + WEAK_DUALITY_SLACK:
            AUDIT["violations"].append((res.value, res.bound))


sdpsolve.add_observer(_audit)


@pytest.fixture(autouse=True)
def weak_duality_audit():
    before = len(AUDIT["violations"])
    yield
    new = AUDIT["violations"][before:]
    assert not new, f"weak duality violated: {new[:3]}"


def pytest_collection_modifyitems(items):
    # the suite-wide weak-duality criterion must see every other solve first
    last = [it for it in items if it.get_closest_marker("run_last")]
    rest = [it for it in items if not it.get_closest_marker("run_last")]
    items[:] = rest + last


def pytest_configure(config):
    config.addinivalue_line("markers", "run_last: run after every other test")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
    terminalreporter.write_line(
        f"solver audit: {AUDIT['solves']} interior-point runs, {AUDIT['checked']} optimal, "
        f"{len(AUDIT['violations'])} weak-duality violations"
    )
