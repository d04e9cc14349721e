import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from spdmeans.verify import gen_spd

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)
dims = st.integers(min_value=1, max_value=6)
caps = st.sampled_from([1.5, 10.0, 100.0])


@st.composite
def spd(draw, dim=None, cap=None):
    d = draw(dims) if dim is None else dim
    c = draw(caps) if cap is None else cap
    return gen_spd(d, c, draw(seeds))


@st.composite
def spd_tuple(draw, n, dim=None, cap=10.0):
    d = draw(st.integers(min_value=1, max_value=5)) if dim is None else dim
    rng = np.random.default_rng(draw(seeds))
    return np.stack([gen_spd(d, cap, rng) for _ in range(n)])


@pytest.fixture
def rng():
    return np.random.default_rng(20260101)


def random_spd(rng, dim, cap=10.0):
    return gen_spd(dim, cap, rng)


def thompson(A, B):
    """Brute-force Thompson distance through the generalized eigenproblem."""
    w = np.linalg.eigvals(np.linalg.solve(B, A)).real
    return float(max(np.log(w.max()), -np.log(w.min())))


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES = {}


@pytest.fixture
def acceptance():
    def record(criterion, passed, detail=""):
        line = f"criterion {criterion}: {'PASS' if passed else 'FAIL'}" + (f" ({detail})" if detail else "")
        ACCEPTANCE_LINES[criterion] = line
        print(line)
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
