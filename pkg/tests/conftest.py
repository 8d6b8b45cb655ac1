import numpy as np
import pytest
from hypothesis import settings

from igrlab import backend

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture(params=backend.available_backends())
def each_backend(request):
    """Run the test once per available kernel backend."""
    previous = backend.use_backend(request.param)
    yield request.param
    backend.use_backend(previous)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """``criterion(label, passed, detail)`` records one acceptance line for the summary."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def report(label, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {label}: {detail}"
        lines.append(line)
        print(line)
        return passed

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
