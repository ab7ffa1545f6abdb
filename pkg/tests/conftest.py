import numpy as np
import pytest
from scipy.optimize import nnls

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: s[7:]):
            terminalreporter.write_line(line)


def anls_residual(A, K, seed, max_sweeps=5000, tol=1e-15):
    """Alternating non-negative least squares with exact NNLS sub-solves.

    Used as an independent oracle for small static problems.
    """
    rng = np.random.default_rng(seed)
    n, m = A.shape
    U = rng.uniform(0, 1, (n, K))
    V = rng.uniform(0, 1, (m, K))
    prev = np.inf
    r = prev
    for _ in range(max_sweeps):
        V = np.array([nnls(U, A[:, j])[0] for j in range(m)])
        U = np.array([nnls(V, A[i, :])[0] for i in range(n)])
        R = A - U @ V.T
        r = float(np.sum(R * R))
        if prev - r < tol:
            break
        prev = r
    return r


def best_anls(A, K, restarts=20):
    return min(anls_residual(A, K, 1000 + s) for s in range(restarts))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
