"""Uniform grid, finite sampled sequences and the discrete operators on them.

Sequences live on the symmetric index range ``-N..N`` of a uniform grid and
are stored as flat float arrays with offset ``N`` (an internal detail).
Indices outside the range are treated as zero everywhere, which matches the
decaying-solution regime the truncated system assumes.

The discrete convolution has two interchangeable implementations: a direct
summation (numba or numpy backend, see ``_backend``) and a fast path that
zero-pads to the next power of two and multiplies real FFTs.  Both compute
the same linear (non-circular) convolution.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._backend import convolve_pair_direct

__all__ = [
    "Grid",
    "SampledSequence",
    "restrict",
    "discrete_convolution",
    "central_difference",
    "lp_norm",
    "quadrature_error_probe",
    "FAST_CONV_MIN_N",
    "fft_convolve",
]

# Below this half-width the direct path beats the FFT path; both stay
# available for cross-checking.
FAST_CONV_MIN_N = 32


@dataclass(frozen=True)
class Grid:
    """Uniform symmetric grid ``x_i = i h`` for ``-N <= i <= N``."""

    h: float
    n_half: int

    def __post_init__(self):
        if not (self.h > 0 and math.isfinite(self.h)):
            raise ValueError("mesh size h must be positive and finite")
        if self.n_half < 1:
            raise ValueError("grid half-width N must be at least 1")

    @property
    def node_count(self) -> int:
        return 2 * self.n_half + 1

    @property
    def half_width(self) -> float:
        return self.n_half * self.h

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(-self.n_half, self.n_half + 1) * self.h


@dataclass(frozen=True, eq=False)
class SampledSequence:
    """Finite sequence of samples ``v_i`` on a grid, indexed ``-N..N``.

    Value-semantic: the array is copied on construction and should not be
    mutated afterwards.
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        if values.shape != (self.grid.node_count,):
            raise ValueError(
                f"expected {self.grid.node_count} values, got {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("sequence entries must be finite")
        object.__setattr__(self, "values", values)

    def __getitem__(self, i: int) -> float:
        """Value at signed index ``i``; zero outside ``-N..N``."""
        if abs(i) > self.grid.n_half:
            return 0.0
        return float(self.values[i + self.grid.n_half])


def restrict(function, grid: Grid) -> SampledSequence:
    """Sample a function on the grid nodes: ``(R w)_i = w(x_i)``."""
    try:
        values = np.asarray(function(grid.nodes), dtype=float)
        if values.shape != (grid.node_count,):
            raise TypeError
    except (TypeError, ValueError):
        # scalar-only callables
        values = np.array([function(x) for x in grid.nodes], dtype=float)
    if not np.all(np.isfinite(values)):
        raise ValueError("function produced non-finite values on the grid")
    return SampledSequence(grid, values)


def _next_pow2(n: int) -> int:
    return 1 << (n - 1).bit_length()


def fft_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Full linear convolution of two 1-d arrays via zero-padded real FFTs.

    Pads to the next power of two at or above ``len(a)+len(b)-1`` so the
    cyclic transform never wraps around.
    """
    full = a.size + b.size - 1
    nfft = _next_pow2(full)
    out = np.fft.irfft(np.fft.rfft(a, nfft) * np.fft.rfft(b, nfft), nfft)
    return out[:full]


def discrete_convolution(
    w: SampledSequence, v: SampledSequence, fast: bool | None = None
) -> SampledSequence:
    """Discrete convolution ``(w * v)_i = sum_j h w_{i-j} v_j`` on the grid.

    Entries of either factor outside ``-N..N`` count as zero.  ``fast``
    selects the FFT path explicitly; by default the direct path is used for
    ``N < FAST_CONV_MIN_N`` and the FFT path otherwise.
    """
    if w.grid != v.grid:
        raise ValueError("convolution factors must share one grid")
    grid = w.grid
    n = grid.n_half
    if fast is None:
        fast = n >= FAST_CONV_MIN_N
    if fast:
        full = fft_convolve(w.values, v.values)
        values = grid.h * full[n : 3 * n + 1]
    else:
        values = convolve_pair_direct(w.values, v.values, grid.h)
    return SampledSequence(grid, values)


def central_difference(w: SampledSequence) -> SampledSequence:
    """Central differences ``(Dw)_i = (w_{i+1} - w_{i-1}) / 2h``.

    The neighbours just outside the range are taken as zero, consistent
    with the truncation convention.
    """
    v = w.values
    h2 = 2.0 * w.grid.h
    out = np.empty_like(v)
    out[1:-1] = (v[2:] - v[:-2]) / h2
    out[0] = v[1] / h2
    out[-1] = -v[-2] / h2
    return SampledSequence(w.grid, out)


def lp_norm(w: SampledSequence, p) -> float:
    """Mesh-weighted sequence norm.

    ``p in {1, 2}`` gives ``(sum h |w_i|^p)^(1/p)``; ``p = inf`` gives the
    plain sup norm.
    """
    v = w.values
    if p == 1:
        return float(w.grid.h * np.sum(np.abs(v)))
    if p == 2:
        return float(math.sqrt(w.grid.h * np.sum(v * v)))
    if p == math.inf:
        return float(np.max(np.abs(v))) if v.size else 0.0
    raise ValueError("p must be 1, 2 or inf")


def quadrature_error_probe(function, grid: Grid, reference: float) -> float:
    """|reference - sum_i h f(x_i)|, the rectangle-sum quadrature defect.

    The caller supplies the reference integral; the grid must be wide
    enough that the omitted tails are negligible at the accuracy being
    probed.
    """
    s = restrict(function, grid)
    return abs(reference - grid.h * float(np.sum(s.values)))
