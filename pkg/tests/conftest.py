import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from evotnfin.network import TnfinNetwork  # noqa: E402


def random_network(rng, inputs, mfs):
    centers = rng.uniform(-1, 1, (inputs, mfs))
    widths = rng.uniform(0.3, 2.0, (inputs, mfs))
    rules = mfs**inputs
    return TnfinNetwork(centers, widths, rng.uniform(-1, 2, rules), rng.uniform(0.05, 1.0, rules))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_acceptance = {}


def pytest_runtest_logreport(report):
    marker = report.user_properties and dict(report.user_properties).get("criterion")
    if not marker:
        return
    failed = report.failed or (report.when == "call" and report.outcome != "passed")
    if report.when == "call" or failed:
        previous = _acceptance.get(marker, "PASS")
        _acceptance[marker] = "FAIL" if failed or previous == "FAIL" else "PASS"


@pytest.fixture(autouse=True)
def _record_criterion(request):
    marker = request.node.get_closest_marker("criterion")
    if marker is not None:
        request.node.user_properties.append(("criterion", marker.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance, key=lambda s: int(s.split()[0][1:])):
        terminalreporter.write_line(f"{_acceptance[name]}  {name}")
