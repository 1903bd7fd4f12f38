import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from chainreid.core import DistanceMatrix  # noqa: E402

_criteria: dict[str, tuple[bool, str]] = {}


def labels(prefix, count):
    return tuple(f"{prefix}{i}" for i in range(count))


def random_symmetric(rng, n, grid=None):
    """Symmetric zero-diagonal matrix; ``grid`` quantizes values to force ties."""
    values = rng.uniform(0.0, 1.0, size=(n, n))
    if grid:
        values = np.round(values * grid) / grid
    values = np.triu(values, 1)
    return values + values.T


def random_instance(rng, m, n, grid=None):
    qg = rng.uniform(0.0, 1.0, size=(m, n))
    if grid:
        qg = np.round(qg * grid) / grid
    gg = random_symmetric(rng, n, grid)
    gids = labels("g", n)
    return DistanceMatrix(labels("q", m), gids, qg), DistanceMatrix(gids, gids, gg)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        detail = ""
        if report.failed:
            detail = str(call.excinfo.value).splitlines()[0] if call.excinfo else ""
        _criteria[marker.args[0]] = (report.passed, detail)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_criteria, key=lambda s: int(s.split(".")[0])):
        ok, detail = _criteria[name]
        line = f"{'PASS' if ok else 'FAIL'}  {name}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)
