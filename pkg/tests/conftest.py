import numpy as np
import pytest
from scipy.stats import ortho_group


def make_spd(rng, d, low=0.3, high=3.0):
    Q = ortho_group.rvs(d, random_state=rng) if d > 1 else np.ones((1, 1))
    w = np.exp(rng.uniform(np.log(low), np.log(high), size=d))
    return (Q * w) @ Q.T


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def spd(rng):
    return lambda d, **kw: make_spd(rng, d, **kw)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
