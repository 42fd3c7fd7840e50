"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

The only O(N^2) loop in the package is the discrete principal-value sum
behind the Hilbert transform.  The backend is chosen once at import time
from the environment variable ``PTKK_BACKEND``:

    PTKK_BACKEND=numba   require the numba JIT kernel (default when numba
                         imports cleanly)
    PTKK_BACKEND=numpy   force the pure-numpy fallback

Both backends evaluate the identical sum; they agree to rounding.  Within
one backend the summation order per output point is fixed, so results are
bit-identical from run to run and, for the numba path, independent of the
number of worker threads (each output row is reduced sequentially by a
single thread).

See benchmarks/bench_hilbert.py for a timing comparison.
"""

from __future__ import annotations

import os

import numpy as np

_ENV_VAR = "PTKK_BACKEND"


def _pv_weighted_sum_numpy(fw: np.ndarray, inv: np.ndarray) -> np.ndarray:
    """Pure-numpy evaluation of ``s[i] = sum_j fw[j] * inv[j - i + n - 1]``.

    np.correlate runs the direct O(N^2) loop in C with a fixed order:
    correlate(inv, fw, 'valid')[k] = sum_j inv[k + j] fw[j], and the row
    for output i is k = n - 1 - i.
    """
    return np.correlate(inv, fw, mode="valid")[::-1]


def _build_numba_kernel():
    from numba import njit, prange

    @njit(parallel=True, fastmath=True, cache=True)
    def _pv_weighted_sum_numba(fw, inv):
        n = fw.shape[0]
        out = np.empty(n)
        for i in prange(n):
            off = n - 1 - i
            s = 0.0
            for j in range(n):
                s += fw[j] * inv[j + off]
            out[i] = s
        return out

    return _pv_weighted_sum_numba


def _select_backend() -> tuple[str, object]:
    requested = os.environ.get(_ENV_VAR, "").strip().lower()
    if requested not in ("", "numba", "numpy"):
        raise ValueError(
            f"{_ENV_VAR} must be 'numba' or 'numpy', got {requested!r}"
        )
    if requested == "numpy":
        return "numpy", _pv_weighted_sum_numpy
    try:
        kernel = _build_numba_kernel()
    except ImportError:
        if requested == "numba":
            raise
        return "numpy", _pv_weighted_sum_numpy
    return "numba", kernel


BACKEND, _pv_weighted_sum = _select_backend()


def backend() -> str:
    """Name of the active kernel backend ('numba' or 'numpy')."""
    return BACKEND


def set_num_threads(n: int) -> None:
    """Cap worker threads for the numba backend (no-op on numpy)."""
    if n < 1:
        raise ValueError("thread count must be >= 1")
    if BACKEND == "numba":
        import numba

        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


def pv_hilbert(values: np.ndarray) -> np.ndarray:
    """Discrete principal-value Hilbert transform on a uniform grid.

    Computes H[f](w_i) = (1/pi) PV int f(w') / (w' - w_i) dw' by trapezoid
    with the singular point w_i excluded.  The +-dw cell around w_i is
    handled by the odd-symmetry of 1/(w'-w_i): the constant part of f
    cancels and the linear part integrates to 2 dw f'(w_i), estimated by
    the centered difference f[i+1] - f[i-1] (one-sided at the ends).  The
    grid spacing cancels against the 1/(w_j - w_i) kernel, so only sample
    values enter.

    Parameters
    ----------
    values : real array
        Samples on a uniform grid.

    Returns
    -------
    real array of the same length.
    """
    f = np.ascontiguousarray(values, dtype=np.float64)
    n = f.shape[0]
    if n < 3:
        raise ValueError("need at least 3 samples")

    # inv[d + n - 1] = 1/d with the singular d = 0 entry zeroed
    d = np.arange(-(n - 1), n, dtype=np.float64)
    d[n - 1] = 1.0
    inv = 1.0 / d
    inv[n - 1] = 0.0

    fw = f.copy()
    fw[0] *= 0.5
    fw[-1] *= 0.5
    s = _pv_weighted_sum(fw, inv)

    # neighbours j = i +- 1 close the outer trapezoid pieces: halve them
    s[:-1] -= 0.5 * fw[1:]
    s[1:] += 0.5 * fw[:-1]

    idx = np.arange(n)
    hi = np.minimum(idx + 1, n - 1)
    lo = np.maximum(idx - 1, 0)
    return (s + f[hi] - f[lo]) / np.pi
