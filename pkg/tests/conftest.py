import numpy as np
import pytest

from kendall_geodesics.monte_carlo import random_pregeodesic, random_preshape


@pytest.fixture
def rng():
    return np.random.default_rng(20130101)


def rand_shape(rng, k=4):
    return random_preshape(rng, k)


def rand_geo(rng, k=4):
    return random_pregeodesic(rng, k)


def unit(k, j):
    e = np.zeros(k - 1, dtype=complex)
    e[j] = 1.0
    return e


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
