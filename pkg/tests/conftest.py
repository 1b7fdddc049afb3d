import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("repo", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("repo")

# the 3x3 sign matrix whose weighted Ky Fan sum reaches 4/3 at the barycenter
S_STAR = np.array([[1, 1, -1], [1, 1, 1], [-1, 1, 1]])


@pytest.fixture
def s_star():
    return S_STAR.copy()


def random_sym(rng, d):
    m = rng.standard_normal((d, d))
    return (m + m.T) / 2


def random_orthogonal(rng, d):
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
