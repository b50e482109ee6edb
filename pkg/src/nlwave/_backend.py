"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

The backend is chosen once at import time from the ``NLWAVE_BACKEND``
environment variable:

* ``numba``  -- require the jitted kernels (raises if numba is missing),
* ``numpy``  -- force the pure-numpy implementations,
* unset / ``auto`` -- use numba when importable, numpy otherwise.

Both backends implement identical summation formulas; they may differ in
the last bits because of rounding order.  Results are deterministic within
a fixed backend.  ``benchmarks/backend_bench.py`` compares the two.
"""

import os

import numpy as np

__all__ = [
    "BACKEND",
    "convolve_pair_direct",
    "convolve_rhs_direct",
    "polynomial_terms",
]

_requested = os.environ.get("NLWAVE_BACKEND", "auto").strip().lower()
if _requested not in ("auto", "numba", "numpy"):
    raise ValueError(
        f"NLWAVE_BACKEND must be 'auto', 'numba' or 'numpy', got {_requested!r}"
    )

try:
    if _requested == "numpy":
        raise ImportError
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:
    _HAVE_NUMBA = False
    if _requested == "numba":
        raise ImportError("NLWAVE_BACKEND=numba but numba is not importable")

BACKEND = "numba" if _HAVE_NUMBA else "numpy"


def _convolve_pair_np(w, v, h):
    # (w * v)_i = sum_j h w_{i-j} v_j on the shared index range, zero padded.
    # 'same' mode of the full linear convolution is exactly the central slice.
    return h * np.convolve(w, v, mode="same")


def _convolve_rhs_np(stencil, g, h):
    # out[p] = -h * sum_q stencil[p + (len(g)-1) - q] * g[q]; 'valid' mode of
    # the (4N+1) x (2N+1) linear convolution is exactly this lag window.
    return -h * np.convolve(stencil, g, mode="valid")


def _polynomial_np(powers, coeffs, v):
    out = np.zeros_like(v)
    for p, c in zip(powers, coeffs):
        out += c * v ** int(p)
    return out


if _HAVE_NUMBA:

    @njit(cache=True, nogil=True)
    def _convolve_pair_nb(w, v, h):  # pragma: no cover - exercised via wrapper
        n = v.size
        half = (n - 1) // 2
        out = np.empty(n)
        for p in range(n):
            lo = p - half
            if lo < 0:
                lo = 0
            hi = p + half
            if hi > n - 1:
                hi = n - 1
            acc = 0.0
            for q in range(lo, hi + 1):
                acc += w[p + half - q] * v[q]
            out[p] = h * acc
        return out

    @njit(cache=True, nogil=True)
    def _convolve_rhs_nb(stencil, g, h):  # pragma: no cover - via wrapper
        n = g.size
        out = np.empty(n)
        for p in range(n):
            base = p + n - 1
            acc = 0.0
            for q in range(n):
                acc += stencil[base - q] * g[q]
            out[p] = -h * acc
        return out

    @njit(cache=True, nogil=True)
    def _polynomial_nb(powers, coeffs, v):  # pragma: no cover - via wrapper
        out = np.zeros_like(v)
        for t in range(powers.size):
            p = powers[t]
            c = coeffs[t]
            for i in range(v.size):
                w = v[i]
                acc = 1.0
                for _ in range(p):
                    acc *= w
                out[i] += c * acc
        return out

    convolve_pair_direct = _convolve_pair_nb
    convolve_rhs_direct = _convolve_rhs_nb
    polynomial_terms = _polynomial_nb
else:
    convolve_pair_direct = _convolve_pair_np
    convolve_rhs_direct = _convolve_rhs_np
    polynomial_terms = _polynomial_np
