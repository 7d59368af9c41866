"""Exact total-variation affinity for product-Bernoulli pairs.

Two exact routes: a 2^n brute-force enumeration (the oracle, n <= 20) and a
product-binomial grid sum that exploits within-group sufficiency of the
success count.  Both accumulate ``exp(min(log f0, log f1))`` with
compensated summation; the grouped route additionally returns ``log eta``
from a streaming log-sum-exp so magnitudes like exp(-3000) survive.
"""
import math
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln

from . import _kernels
from .dists import GroupedPair, HypothesisPair, group
from .errors import GridTooLarge, TooLarge

BRUTEFORCE_MAX_N = 20
GRID_CELL_LIMIT = 10 ** 7


def binomial_log_pmf(x, n: int, p: float) -> np.ndarray:
    """log Binom(n, p) pmf at integer points x, via log-gamma."""
    x = np.asarray(x, dtype=np.float64)
    return (gammaln(n + 1.0) - gammaln(x + 1.0) - gammaln(n - x + 1.0)
            + x * math.log(p) + (n - x) * math.log1p(-p))


def affinity_bruteforce(pair: HypothesisPair) -> float:
    """Enumerate all 2^n outcomes and sum the pointwise minimum mass.

    Exact up to floating summation (Kahan-compensated).  Limited to
    n <= 20; raises TooLarge beyond that.
    """
    if pair.n > BRUTEFORCE_MAX_N:
        raise TooLarge(f"n={pair.n} exceeds brute-force limit {BRUTEFORCE_MAX_N}")
    lp0 = np.log(pair.p0)
    l1p0 = np.log1p(-pair.p0)
    lp1 = np.log(pair.p1)
    l1p1 = np.log1p(-pair.p1)
    return float(_kernels.bruteforce_kernel(lp0, l1p0, lp1, l1p1))


class GroupedAffinity(NamedTuple):
    eta: float
    log_eta: float


def _drop_identical(grouped: GroupedPair):
    # groups with p0 == p1 contribute an exact factor of one to the min-sum
    keep = grouped.p0 != grouped.p1
    return grouped.p0[keep], grouped.p1[keep], grouped.counts[keep]


def affinity_grouped(grouped) -> GroupedAffinity:
    """Exact affinity through per-group binomial sufficiency.

    Within a group of ``c`` coordinates sharing (p0, p1) the success count
    is sufficient, so the 2^n outcome sum collapses to a grid over count
    vectors with ``prod(c_g + 1)`` cells.  Cell masses come from log-gamma
    binomial tables; the largest group is kept as the vectorized axis and
    the remaining groups are pre-combined into joint tables.

    Parameters
    ----------
    grouped : GroupedPair (a HypothesisPair is grouped on the fly)

    Returns
    -------
    GroupedAffinity
        ``eta`` (linear, compensated) and ``log_eta`` (streaming
        log-sum-exp; finite even when ``eta`` underflows to 0).

    Raises
    ------
    GridTooLarge
        If the grid exceeds ``GRID_CELL_LIMIT`` cells; callers fall back
        to :func:`chernoff_sbm.chernoff.tilted_mc_affinity`.
    """
    if isinstance(grouped, HypothesisPair):
        grouped = group(grouped)
    p0, p1, counts = _drop_identical(grouped)
    if len(counts) == 0:
        return GroupedAffinity(1.0, 0.0)
    cells = 1
    for c in counts:
        cells *= int(c) + 1
        if cells > GRID_CELL_LIMIT:
            raise GridTooLarge(
                f"count grid exceeds {GRID_CELL_LIMIT} cells")

    tables = []
    for a, b, c in zip(p0, p1, counts):
        x = np.arange(int(c) + 1)
        tables.append((binomial_log_pmf(x, int(c), a),
                       binomial_log_pmf(x, int(c), b)))
    axis = int(np.argmax(counts))
    ax0, ax1 = tables[axis]
    rest0 = np.zeros(1)
    rest1 = np.zeros(1)
    for g, (t0, t1) in enumerate(tables):
        if g == axis:
            continue
        rest0 = (rest0[:, None] + t0[None, :]).ravel()
        rest1 = (rest1[:, None] + t1[None, :]).ravel()
    eta, log_eta = _kernels.grouped_grid_kernel(rest0, rest1, ax0, ax1)
    return GroupedAffinity(float(eta), float(log_eta))


def bayes_error(pair_or_grouped) -> float:
    """Half the affinity: the error of the optimal equal-prior test."""
    return 0.5 * affinity_grouped(pair_or_grouped).eta


def tv_distance(pair_or_grouped) -> float:
    """Total-variation distance, 1 - eta."""
    return 1.0 - affinity_grouped(pair_or_grouped).eta
