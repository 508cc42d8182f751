import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from scipy import integrate

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def quad_half_line(func, scale=1.0, points=()):
    """Independent oracle: split [0, 80*scale] at a few scale points, tail by QAGI."""
    cuts = sorted({0.0, *(p for p in points if p > 0), scale, 5 * scale, 20 * scale, 80 * scale})
    total = math.fsum(
        integrate.quad(func, a, b, epsabs=1e-14, epsrel=1e-13, limit=500)[0] for a, b in zip(cuts, cuts[1:])
    )
    return total + integrate.quad(func, cuts[-1], np.inf, limit=200)[0]


@pytest.fixture
def quad():
    return quad_half_line
