"""Time the hot affinity kernels under the numba and numpy backends.

Run:  python benchmarks/bench_backends.py
The library picks its backend from CHERNOFF_SBM_BACKEND; this script
imports both implementations directly so one process can compare them.
"""
import time

import numpy as np

from chernoff_sbm import _kernels
from chernoff_sbm.affinity import binomial_log_pmf


def _timeit(fn, *args, repeat=3):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def bench_bruteforce(n=20):
    rng = np.random.default_rng(0)
    p0 = rng.uniform(0.05, 0.95, n)
    p1 = rng.uniform(0.05, 0.95, n)
    args = (np.log(p0), np.log1p(-p0), np.log(p1), np.log1p(-p1))
    rows = []
    t, ref = _timeit(_kernels.bruteforce_numpy, *args)
    rows.append(("numpy", t, ref))
    if _kernels.HAVE_NUMBA:
        _kernels.bruteforce_numba(*args)   # compile outside the timing
        t, val = _timeit(_kernels.bruteforce_numba, *args)
        rows.append(("numba", t, val))
    print(f"bruteforce 2^{n} outcomes")
    _report(rows)


def bench_grouped(sizes=(200, 200, 200)):
    # three equal groups: the K=3 genie-pair shape, ~8.1e6 grid cells
    rng = np.random.default_rng(1)
    tables = []
    for c in sizes:
        p, q = rng.uniform(0.2, 0.8, 2)
        x = np.arange(c + 1)
        tables.append((binomial_log_pmf(x, c, p), binomial_log_pmf(x, c, q)))
    ax0, ax1 = tables[0]
    rest0 = np.zeros(1)
    rest1 = np.zeros(1)
    for t0, t1 in tables[1:]:
        rest0 = (rest0[:, None] + t0[None, :]).ravel()
        rest1 = (rest1[:, None] + t1[None, :]).ravel()
    rows = []
    t, ref = _timeit(_kernels.grouped_grid_numpy, rest0, rest1, ax0, ax1)
    rows.append(("numpy", t, ref[0]))
    if _kernels.HAVE_NUMBA:
        _kernels.grouped_grid_numba(rest0, rest1, ax0, ax1)
        t, val = _timeit(_kernels.grouped_grid_numba, rest0, rest1, ax0, ax1)
        rows.append(("numba", t, val[0]))
    cells = int(np.prod([c + 1 for c in sizes]))
    print(f"grouped grid, {cells} cells")
    _report(rows)


def _report(rows):
    base = rows[0][1]
    for name, t, val in rows:
        print(f"  {name:6s} {t * 1e3:10.2f} ms   x{base / t:6.2f}   value={val!r}")
    print()


if __name__ == "__main__":
    bench_bruteforce()
    bench_grouped()
