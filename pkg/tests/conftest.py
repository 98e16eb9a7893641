import numpy as np
import pytest

from mpcptd.igp import traverse_grid
from mpcptd.tdnet import TDNetwork, TimeHorizon


def speed_network(rng, n_fac, n_cus, M, end=1440.0, common=False):
    """Random FIFO network built from dummy lengths and positive stepwise speeds."""
    horizon = TimeHorizon.uniform(M, end=end)
    n = n_fac * n_cus
    lengths = rng.uniform(5.0, 40.0, n)
    if common:
        g = rng.uniform(0.2, 1.0, M + 1)
        speeds = np.tile(g, (n, 1))
    else:
        speeds = rng.uniform(0.2, 1.0, (n, M + 1))
    tt = traverse_grid(lengths, speeds, horizon.instants).reshape(n_fac, n_cus, M + 2)
    return TDNetwork(range(n_fac), range(n_cus), horizon, tt)


def integer_network(rng, n, M, step=10, top=40):
    """Integer travel times on an integer grid with slopes strictly above -1.

    Every sum of entries is exact in floating point.
    """
    horizon = TimeHorizon(0, step * (M + 1), tuple(step * k for k in range(1, M + 1)))
    tt = np.empty((n, n, M + 2))
    for i in range(n):
        for j in range(n):
            v = int(rng.integers(1, top + 1))
            row = [v]
            for _ in range(M + 1):
                v = int(rng.integers(max(1, v - step + 1), top + 1))
                row.append(v)
            tt[i, j] = row
    return TDNetwork(range(n), range(n), horizon, tt)


def brute_force_ranking(rows):
    """Pairwise O(|E|^2 M) ranking-invariance check."""
    rows = np.asarray(rows)
    for a in range(len(rows)):
        for b in range(a + 1, len(rows)):
            if not (np.all(rows[a] <= rows[b]) or np.all(rows[b] <= rows[a])):
                return False
    return True


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
