import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20260101)


def random_2d(rng, n1, n2=None):
    from bipara import Signal2D

    n2 = n1 if n2 is None else n2
    return Signal2D.from_values(rng.standard_normal((1 << n1, 1 << n2)))


def random_1d(rng, n):
    from bipara import Signal1D

    return Signal1D.from_values(rng.standard_normal(1 << n))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("]")[1].split(".")[0])):
            terminalreporter.write_line(line)
