"""Hot numeric kernels with numba and pure-numpy implementations.

Each kernel exists twice: ``*_numpy`` (vectorized, chunked) and ``*_numba``
(JIT loops).  The module-level dispatch functions pick the active backend;
both variants stay importable so the benchmark can time them side by side.

All sums of nonnegative cell masses are compensated (Kahan in the loops,
``math.fsum`` across chunk totals in the numpy path), and every log result
comes from a streaming log-sum-exp that tracks the running maximum, so
``log_eta`` stays accurate down to magnitudes like exp(-3000).
"""
import math

import numpy as np

from ._backend import HAVE_NUMBA

_CHUNK = 1 << 16


def _stream_merge(m_old, s_old, m_new, s_new):
    # merge two (max, sum of exp(v - max)) logsumexp accumulators
    if m_new <= m_old:
        return m_old, s_old + s_new * math.exp(m_new - m_old)
    return m_new, s_new + s_old * math.exp(m_old - m_new)


def bruteforce_numpy(lp0, l1p0, lp1, l1p1):
    """Sum of exp(min(log f0, log f1)) over all 2^n outcome vectors."""
    n = lp0.shape[0]
    total = 1 << n
    chunk_sums = []
    base0 = l1p0.sum()
    base1 = l1p1.sum()
    d0 = lp0 - l1p0
    d1 = lp1 - l1p1
    for lo in range(0, total, _CHUNK):
        hi = min(lo + _CHUNK, total)
        idx = np.arange(lo, hi, dtype=np.uint64)[:, None]
        bits = (idx >> np.arange(n, dtype=np.uint64)[None, :]) & 1
        bits = bits.astype(np.float64)
        s0 = bits @ d0 + base0
        s1 = bits @ d1 + base1
        chunk_sums.append(float(np.exp(np.minimum(s0, s1)).sum()))
    return math.fsum(chunk_sums)


def grouped_grid_numpy(rest0, rest1, ax0, ax1):
    """Exact min-sum over the product grid rest x axis.

    ``rest0``/``rest1`` are the joint log masses of all but the largest
    group (length R); ``ax0``/``ax1`` the largest group's tables (length M).
    Returns ``(eta, log_eta)`` where eta is the linear Kahan/fsum total and
    log_eta comes from the streaming log-sum-exp.
    """
    chunk = max(1, _CHUNK // max(1, ax0.shape[0]))
    chunk_sums = []
    m_run, s_run = -np.inf, 0.0
    for lo in range(0, rest0.shape[0], chunk):
        hi = min(lo + chunk, rest0.shape[0])
        v = np.minimum(rest0[lo:hi, None] + ax0[None, :],
                       rest1[lo:hi, None] + ax1[None, :])
        chunk_sums.append(float(np.exp(v).sum()))
        m_new = float(v.max())
        s_new = float(np.exp(v - m_new).sum())
        m_run, s_run = _stream_merge(m_run, s_run, m_new, s_new)
    eta = math.fsum(chunk_sums)
    log_eta = m_run + math.log(s_run) if s_run > 0 else -np.inf
    return eta, log_eta


if HAVE_NUMBA:
    from numba import njit

    @njit(cache=True)
    def bruteforce_numba(lp0, l1p0, lp1, l1p1):  # pragma: no cover - jitted
        n = lp0.shape[0]
        total = 1 << n
        acc = 0.0
        comp = 0.0
        for x in range(total):
            s0 = 0.0
            s1 = 0.0
            for b in range(n):
                if (x >> b) & 1:
                    s0 += lp0[b]
                    s1 += lp1[b]
                else:
                    s0 += l1p0[b]
                    s1 += l1p1[b]
            v = math.exp(min(s0, s1))
            y = v - comp
            t = acc + y
            comp = (t - acc) - y
            acc = t
        return acc

    @njit(cache=True)
    def grouped_grid_numba(rest0, rest1, ax0, ax1):  # pragma: no cover
        acc = 0.0
        comp = 0.0
        m_run = -np.inf
        s_run = 0.0
        for r in range(rest0.shape[0]):
            a0 = rest0[r]
            a1 = rest1[r]
            for x in range(ax0.shape[0]):
                v = min(a0 + ax0[x], a1 + ax1[x])
                y = math.exp(v) - comp
                t = acc + y
                comp = (t - acc) - y
                acc = t
                if v <= m_run:
                    s_run += math.exp(v - m_run)
                else:
                    s_run = 1.0 + s_run * math.exp(m_run - v)
                    m_run = v
        log_eta = m_run + math.log(s_run) if s_run > 0 else -np.inf
        return acc, log_eta

    bruteforce_kernel = bruteforce_numba
    grouped_grid_kernel = grouped_grid_numba
else:
    bruteforce_kernel = bruteforce_numpy
    grouped_grid_kernel = grouped_grid_numpy
