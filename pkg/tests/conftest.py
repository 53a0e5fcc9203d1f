import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=60, deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])
settings.load_profile("default")

_ACCEPTANCE = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def acceptance_log():
    """Criterion results, echoed one line each in the terminal summary."""
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for r in sorted(_ACCEPTANCE, key=lambda r: r.number):
        terminalreporter.write_line(r.line())
    ok = sum(r.passed and r.in_time for r in _ACCEPTANCE)
    terminalreporter.write_line(f"{ok}/{len(_ACCEPTANCE)} passed")
