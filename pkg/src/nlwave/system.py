"""The truncated convolution system dv_i/dt = -sum_j h Dbeta(x_i - x_j) f(v_j).

The spatial derivative is carried entirely by the kernel: the stencil holds
central differences of the sampled kernel over all lags ``-2N..2N``, and the
right-hand side is one discrete convolution of that stencil with ``f(v)``.
No derivative of the state ever appears, which is why the time integration
has no mesh-size stability restriction.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ._backend import convolve_rhs_direct, polynomial_terms
from .discrete import FAST_CONV_MIN_N, Grid, SampledSequence
from .kernels import Kernel

__all__ = [
    "BlowUpError",
    "Nonlinearity",
    "TruncatedSystem",
    "build_system",
    "rhs",
    "apply_nonlinearity",
    "discrete_mass",
    "DEFAULT_BLOW_UP_THRESHOLD",
]

# Finite stand-in for the asymptotic blow-up condition limsup |v| = inf.
DEFAULT_BLOW_UP_THRESHOLD = 1e6


class BlowUpError(RuntimeError):
    """State exceeded the blow-up guard or produced non-finite values."""


@dataclass(frozen=True)
class Nonlinearity:
    """Polynomial nonlinearity ``f(u) = sum_k c_k u^{p_k}`` with f(0) = 0.

    ``terms`` is a tuple of ``(power, coefficient)`` pairs with strictly
    positive integer powers; a constant term is structurally impossible.
    """

    terms: tuple[tuple[int, float], ...]

    def __post_init__(self):
        if not self.terms:
            raise ValueError("nonlinearity needs at least one term")
        cleaned = []
        for power, coeff in self.terms:
            if int(power) != power or power < 1:
                raise ValueError(f"term power must be a positive integer: {power}")
            if not math.isfinite(coeff):
                raise ValueError("term coefficients must be finite")
            cleaned.append((int(power), float(coeff)))
        object.__setattr__(self, "terms", tuple(cleaned))
        object.__setattr__(
            self, "_powers", np.array([p for p, _ in cleaned], dtype=np.int64)
        )
        object.__setattr__(
            self, "_coeffs", np.array([c for _, c in cleaned], dtype=float)
        )

    @classmethod
    def bbm(cls, p: int = 1) -> "Nonlinearity":
        """``f(u) = u + u^{p+1}``, the generalized BBM nonlinearity."""
        return cls(((1, 1.0), (p + 1, 1.0)))

    @classmethod
    def rosenau(cls) -> "Nonlinearity":
        """``f(u) = u - 10 u^3 + 12 u^5``."""
        return cls(((1, 1.0), (3, -10.0), (5, 12.0)))

    def evaluate_values(self, v: np.ndarray) -> np.ndarray:
        """Entrywise evaluation on a raw array (hot path, no guards)."""
        return polynomial_terms(self._powers, self._coeffs, v)

    def max_abs_on_interval(self, bound: float, samples: int = 513) -> float:
        """max |f(z)| over |z| <= bound, by dense sampling."""
        if bound == 0.0:
            return 0.0
        z = np.linspace(-bound, bound, samples)
        return float(np.max(np.abs(self.evaluate_values(z))))


@dataclass(frozen=True, eq=False)
class TruncatedSystem:
    """Grid, stencil and nonlinearity bundled for right-hand-side evaluation.

    ``stencil`` holds ``Dbeta_h`` over lags ``-2N..2N`` (length 4N+1) so that
    every difference ``x_i - x_j`` of grid nodes is covered.  ``fast_mode``
    selects the convolution path: ``"auto"`` uses the FFT path from
    ``N >= FAST_CONV_MIN_N`` upward, ``"on"``/``"off"`` force it.
    """

    grid: Grid
    stencil: np.ndarray
    nonlinearity: Nonlinearity
    blow_up_threshold: float = DEFAULT_BLOW_UP_THRESHOLD
    fast_mode: str = "auto"
    _stencil_fft: np.ndarray = field(init=False, repr=False)
    _nfft: int = field(init=False, repr=False)

    def __post_init__(self):
        stencil = np.array(self.stencil, dtype=float, copy=True)
        n = self.grid.n_half
        if stencil.shape != (4 * n + 1,):
            raise ValueError(f"stencil must cover lags -2N..2N, need {4*n+1} entries")
        if not np.all(np.isfinite(stencil)):
            raise ValueError("stencil entries must be finite")
        if not self.blow_up_threshold > 0:
            raise ValueError("blow-up threshold must be positive")
        if self.fast_mode not in ("auto", "on", "off"):
            raise ValueError("fast_mode must be 'auto', 'on' or 'off'")
        object.__setattr__(self, "stencil", stencil)
        nfft = 1 << (6 * n).bit_length()  # >= 6N+1 full-convolution length
        object.__setattr__(self, "_nfft", nfft)
        object.__setattr__(self, "_stencil_fft", np.fft.rfft(stencil, nfft))

    @property
    def use_fast(self) -> bool:
        if self.fast_mode == "on":
            return True
        if self.fast_mode == "off":
            return False
        return self.grid.n_half >= FAST_CONV_MIN_N

    def stencil_l1(self) -> float:
        """Mesh-weighted stencil norm ``sum_k h |Dbeta_h(k)|``."""
        return float(self.grid.h * np.sum(np.abs(self.stencil)))

    def rhs_values(self, v: np.ndarray) -> np.ndarray:
        """Right-hand side on a raw state array, with blow-up guards."""
        if np.max(np.abs(v)) > self.blow_up_threshold:
            raise BlowUpError(
                f"state sup-norm exceeded the blow-up threshold "
                f"{self.blow_up_threshold:g}"
            )
        g = self.nonlinearity.evaluate_values(v)
        if not np.all(np.isfinite(g)):
            raise BlowUpError("nonlinearity overflowed to non-finite values")
        n = self.grid.n_half
        if self.use_fast:
            conv = np.fft.irfft(np.fft.rfft(g, self._nfft) * self._stencil_fft,
                                self._nfft)
            out = -self.grid.h * conv[2 * n : 4 * n + 1]
        else:
            out = convolve_rhs_direct(self.stencil, g, self.grid.h)
        if not np.all(np.isfinite(out)):
            raise BlowUpError("right-hand side overflowed to non-finite values")
        return out


def build_system(
    kernel: Kernel,
    grid: Grid,
    nonlinearity: Nonlinearity,
    blow_up_threshold: float = DEFAULT_BLOW_UP_THRESHOLD,
    fast_mode: str = "auto",
) -> TruncatedSystem:
    """Sample the kernel's central differences and assemble the system.

    ``stencil_k = (beta((k+1)h) - beta((k-1)h)) / 2h`` for lags ``-2N..2N``.
    The mesh-weighted stencil norm can never exceed the total variation of
    ``beta'``; that bound is asserted here (1e-10 slack) as a consistency
    check on the kernel metadata.
    """
    h, n = grid.h, grid.n_half
    lags = np.arange(-2 * n, 2 * n + 1)
    bp = np.asarray(kernel.evaluate((lags + 1) * h), dtype=float)
    bm = np.asarray(kernel.evaluate((lags - 1) * h), dtype=float)
    if not (np.all(np.isfinite(bp)) and np.all(np.isfinite(bm))):
        raise ValueError("kernel evaluation failed at a required lag")
    stencil = (bp - bm) / (2.0 * h)
    system = TruncatedSystem(
        grid=grid,
        stencil=stencil,
        nonlinearity=nonlinearity,
        blow_up_threshold=blow_up_threshold,
        fast_mode=fast_mode,
    )
    bound = kernel.derivative_total_variation + 1e-10
    if system.stencil_l1() > bound:
        raise ValueError(
            f"stencil norm {system.stencil_l1():.12g} exceeds the declared "
            f"derivative total variation {kernel.derivative_total_variation:.12g}"
        )
    return system


def rhs(system: TruncatedSystem, state: SampledSequence) -> SampledSequence:
    """Evaluate the truncated right-hand side at a state."""
    if state.grid != system.grid:
        raise ValueError("state grid does not match the system grid")
    return SampledSequence(system.grid, system.rhs_values(state.values))


def apply_nonlinearity(nl: Nonlinearity, state: SampledSequence) -> SampledSequence:
    """Entrywise ``f(v)``; non-finite results raise BlowUpError."""
    out = nl.evaluate_values(state.values)
    if not np.all(np.isfinite(out)):
        raise BlowUpError("nonlinearity overflowed to non-finite values")
    return SampledSequence(state.grid, out)


def discrete_mass(state: SampledSequence) -> float:
    """Mesh-weighted sum ``sum_i h v_i``, the discrete conserved mass."""
    return float(state.grid.h * np.sum(state.values))
