import numpy as np
import pytest

from bimodalmap import MapParams
from bimodalmap.orbits import attractor_set


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile the numba kernels once so timing checks measure steady-state cost."""
    attractor_set(MapParams(-12.0, -30.0), n_transient=100, n_sample=64, p_max=32)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_acceptance = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        doc = report.user_properties and dict(report.user_properties).get("criterion")
        _acceptance.append((report.outcome.upper(), doc or report.nodeid.split("::")[-1]))


@pytest.fixture(autouse=True)
def _criterion_name(request):
    doc = request.function.__doc__
    if doc:
        request.node.user_properties.append(("criterion", doc.strip().splitlines()[0]))


def pytest_terminal_summary(terminalreporter):
    if _acceptance:
        terminalreporter.section("acceptance criteria")
        for outcome, name in _acceptance:
            terminalreporter.write_line(f"{'PASS' if outcome == 'PASSED' else 'FAIL'}  {name}")
