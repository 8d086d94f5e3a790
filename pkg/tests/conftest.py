import numpy as np
import pytest

from cmvkit.core import Explicit, Periodic


def random_disk(rng, size, rmax=0.8):
    r = rmax * np.sqrt(rng.uniform(0, 1, size))
    return r * np.exp(1j * rng.uniform(0, 2 * np.pi, size))


def random_periodic(rng, max_period=6, rmax=0.8):
    return Periodic(random_disk(rng, int(rng.integers(1, max_period + 1)), rmax))


def random_explicit(rng, lo=-600, hi=600, rmax=0.8):
    return Explicit(random_disk(rng, hi - lo + 1, rmax), offset=lo)


def random_z(rng, size, rmax=0.95):
    return random_disk(rng, size, rmax)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
