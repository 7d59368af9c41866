"""Backend selection for the hot numeric kernels.

The environment variable ``CHERNOFF_SBM_BACKEND`` picks the implementation:
``numba`` (default when importable) JIT-compiles the inner loops, ``numpy``
forces the pure-vectorized fallback.  Both compute the same quantities; see
``benchmarks/bench_backends.py`` for a timing comparison.
"""
import os

_requested = os.environ.get("CHERNOFF_SBM_BACKEND", "").strip().lower()

if _requested not in ("", "numba", "numpy"):
    raise ValueError(
        f"CHERNOFF_SBM_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

if _requested == "numpy":
    HAVE_NUMBA = False
else:
    try:
        import numba  # noqa: F401
        HAVE_NUMBA = True
    except ImportError:
        if _requested == "numba":
            raise
        HAVE_NUMBA = False


def active_backend() -> str:
    """Name of the kernel implementation in use ('numba' or 'numpy')."""
    return "numba" if HAVE_NUMBA else "numpy"
