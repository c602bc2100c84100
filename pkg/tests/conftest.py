import math
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

from logspect import FilterSpec, GraphEnsembleSpec, generate, sample_covariance, sample_signals  # noqa: E402


def connected_er(m, p, rng):
    spec = GraphEnsembleSpec("ER", m, p)
    while True:
        g = generate(spec, rng)
        if g.is_connected():
            return g


def small_instance(rng, m=4, p=0.5, n=100, c=0.2):
    """Sample covariance of a connected ER graph with the quadratic filter and
    the radius ``c sqrt(log n / n) max|lambda|``."""
    g = connected_er(m, p, rng)
    C = sample_covariance(sample_signals(FilterSpec.quadratic(), g, n, seed=rng))
    delta = c * math.sqrt(math.log(n) / n) * float(np.abs(C.eigh[0]).max())
    return g, C, delta


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = {}


@pytest.fixture
def report():
    """Record one pass/fail line for an acceptance criterion."""

    def _report(number, passed, detail):
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        return passed

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
