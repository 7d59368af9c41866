import numpy as np
import pytest

from chernoff_sbm import HypothesisPair, validate_pair


def random_pair(rng, n_lo=1, n_hi=14, p_lo=0.05, p_hi=0.95) -> HypothesisPair:
    """Fully random pair; coordinates almost surely all distinct."""
    n = int(rng.integers(n_lo, n_hi + 1))
    return validate_pair(rng.uniform(p_lo, p_hi, n), rng.uniform(p_lo, p_hi, n))


def structured_pair(rng, n_max=14) -> HypothesisPair:
    """Pair with repeated (p0, p1) values so grouping is nontrivial."""
    g = int(rng.integers(1, 5))
    vals0 = rng.uniform(0.05, 0.95, g)
    vals1 = rng.uniform(0.05, 0.95, g)
    counts = rng.multinomial(int(rng.integers(g, n_max + 1)) - g,
                             np.full(g, 1.0 / g)) + 1
    return validate_pair(np.repeat(vals0, counts), np.repeat(vals1, counts))


def two_cliques(size: int) -> np.ndarray:
    """Adjacency of two disjoint complete graphs of the given size."""
    n = 2 * size
    A = np.zeros((n, n), dtype=np.uint8)
    A[:size, :size] = 1
    A[size:, size:] = 1
    np.fill_diagonal(A, 0)
    return A


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
