"""Ready-made problem bundles: kernel, nonlinearity and exact-solution oracle."""

import math
from dataclasses import dataclass
from typing import Callable

from .analytic import SolitaryWave, bbm_solitary, rosenau_solitary
from .kernels import Kernel, bbm_kernel, rosenau_kernel
from .system import Nonlinearity

__all__ = ["Problem", "bbm_problem", "rosenau_problem", "custom_problem"]


@dataclass(frozen=True)
class Problem:
    """Everything needed to set up a run of one equation.

    ``wave`` is the exact solitary-wave oracle, or None for kernels without
    a known closed-form solution; such problems carry an explicit
    ``initial_profile`` instead and report errors by self-refinement.
    ``envelope_scale`` is the natural length scale of the decay envelope.
    """

    name: str
    kernel: Kernel
    nonlinearity: Nonlinearity
    wave: SolitaryWave | None
    envelope_scale: float = 1.0
    initial_profile: Callable | None = None


def bbm_problem(p: int = 1, c: float = 1.8, x0: float = -18.0) -> Problem:
    """Exponential kernel with ``f(u) = u + u^{p+1}`` and its solitary wave."""
    return Problem(
        name="bbm",
        kernel=bbm_kernel(),
        nonlinearity=Nonlinearity.bbm(p),
        wave=bbm_solitary(p=p, c=c, x0=x0),
        envelope_scale=1.0,
    )


def rosenau_problem(x0: float = -2.5) -> Problem:
    """Oscillatory kernel with ``f(u) = u - 10u^3 + 12u^5`` and its sech wave."""
    return Problem(
        name="rosenau",
        kernel=rosenau_kernel(),
        nonlinearity=Nonlinearity.rosenau(),
        wave=rosenau_solitary(x0=x0),
        envelope_scale=math.sqrt(2.0),
    )


def custom_problem(
    kernel: Kernel,
    nonlinearity: Nonlinearity,
    initial_profile: Callable,
    name: str = "custom",
) -> Problem:
    """User-supplied kernel, nonlinearity and initial profile; no oracle."""
    return Problem(
        name=name,
        kernel=kernel,
        nonlinearity=nonlinearity,
        wave=None,
        envelope_scale=1.0,
        initial_profile=initial_profile,
    )
