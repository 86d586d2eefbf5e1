import itertools

import numpy as np
import pytest

from affgen import Metric, Multivector
from affgen._kernels import blade_layout
from affgen.riemann import ScalarField


def random_spd(rng, n, spread=1.0):
    A = rng.normal(size=(n, n))
    G = A @ A.T / n + spread * np.eye(n)
    return Metric((G + G.T) / 2)


def random_homogeneous(rng, n, p):
    masks = blade_layout(n)[0][p]
    data = np.zeros(1 << n)
    data[masks] = rng.normal(size=masks.size)
    return Multivector(n, data)


def random_polynomial(rng, n, degree, n_terms=6, scale=1.0):
    terms = []
    for _ in range(n_terms):
        d = rng.integers(0, degree + 1)
        e = np.zeros(n, dtype=int)
        for _ in range(d):
            e[rng.integers(0, n)] += 1
        terms.append((scale * rng.normal(), tuple(int(v) for v in e)))
    return ScalarField(n, terms)


def leibniz_det(M):
    """Permutation-expansion determinant; independent of LAPACK."""
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    if n == 0:
        return 1.0
    total = 0.0
    for perm in itertools.permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        prod = 1.0
        for i, j in enumerate(perm):
            prod *= M[i, j]
        total += (-1) ** inv * prod
    return total


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance_log(request):
    """Collects one verdict line per acceptance criterion for the summary."""
    return request.config.stash.setdefault(_ACCEPTANCE_KEY, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
