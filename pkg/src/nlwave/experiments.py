"""Error metrics, convergence-rate fitting and the three study protocols.

The studies mirror the standard solitary-wave benchmark set: a profile
comparison at one resolution, an h-refinement sweep at fixed domain, and a
domain-truncation sweep at fixed mesh size.  Independent runs execute on a
bounded thread pool; records are keyed and sorted by their parameters so
aggregated output is order-independent.
"""

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analytic import evaluate_solitary, initial_data
from .discrete import Grid, SampledSequence, restrict
from .integrator import IntegratorConfig, Trajectory, integrate
from .problems import Problem
from .system import build_system, discrete_mass

__all__ = [
    "DegenerateRateError",
    "ErrorRecord",
    "RateEstimate",
    "StudyConfig",
    "ProfileStudy",
    "TruncationRecord",
    "linf_error",
    "convergence_rate",
    "fit_observed_order",
    "run_single",
    "run_profile_study",
    "run_h_refinement",
    "run_truncation_study",
    "plateau_onset",
]


class DegenerateRateError(ValueError):
    """A convergence rate was requested from a zero error."""


@dataclass(frozen=True)
class ErrorRecord:
    """One run's error sample plus cost metadata."""

    h: float
    n_half: int
    t: float
    linf_error: float
    accepted_steps: int
    wall_time: float

    def __post_init__(self):
        if self.linf_error < 0:
            raise ValueError("linf_error must be nonnegative")


@dataclass(frozen=True)
class RateEstimate:
    """Observed order between two mesh sizes: rho = log(E1/E2) / log(h1/h2)."""

    h_pair: tuple[float, float]
    rho: float


def linf_error(numeric: SampledSequence, wave, t: float) -> float:
    """Sup-norm gap between the numeric state and the exact wave at time t."""
    exact = evaluate_solitary(wave, numeric.grid.nodes, t)
    return float(np.max(np.abs(exact - numeric.values)))


def convergence_rate(e1: ErrorRecord, e2: ErrorRecord) -> RateEstimate:
    """Fit the observed order from two error records at distinct h."""
    if e1.h == e2.h:
        raise ValueError("rate needs two distinct mesh sizes")
    if e1.linf_error == 0.0 or e2.linf_error == 0.0:
        raise DegenerateRateError("zero error: the observed order is undefined")
    rho = math.log(e1.linf_error / e2.linf_error) / math.log(e1.h / e2.h)
    return RateEstimate(h_pair=(e1.h, e2.h), rho=rho)


def fit_observed_order(hs, errors, noise_floor: float = 0.0) -> float:
    """Least-squares slope of log error against log h.

    Points at or below ``noise_floor`` are discarded: they measure rounding,
    not truncation.  If fewer than two points survive, the error never rose
    above the floor on the whole refinement range and the observed order is
    reported as ``inf`` (no measurable degradation).
    """
    hs = np.asarray(hs, dtype=float)
    errors = np.asarray(errors, dtype=float)
    keep = errors > noise_floor
    if int(np.sum(keep)) < 2:
        return math.inf
    slope = np.polyfit(np.log(hs[keep]), np.log(errors[keep]), 1)[0]
    return float(slope)


@dataclass(frozen=True)
class StudyConfig:
    """Shared run parameters for the study protocols."""

    problem: Problem
    domain_half_width: float
    h: float
    t_end: float
    snapshot_times: tuple[float, ...] = ()
    integrator: IntegratorConfig = IntegratorConfig()
    fast_mode: str = "auto"
    blow_up_threshold: float = 1e6

    def grid(self, h: float | None = None, n_half: int | None = None) -> Grid:
        if n_half is not None:
            return Grid(h=self.h, n_half=n_half)
        h = self.h if h is None else h
        ratio = self.domain_half_width / h
        n = round(ratio)
        if abs(ratio - n) > 1e-9 * max(1.0, abs(ratio)) or n < 1:
            raise ValueError(
                f"mesh size {h} does not divide the half-width "
                f"{self.domain_half_width} evenly"
            )
        return Grid(h=h, n_half=int(n))

    def snapshots(self) -> tuple[float, ...]:
        if self.snapshot_times:
            return tuple(self.snapshot_times)
        return (0.0, self.t_end) if self.t_end > 0 else (0.0,)


def run_single(cfg: StudyConfig, grid: Grid):
    """Integrate one configuration; returns (trajectory, record, wall_time).

    The record's error field is NaN when the problem has no exact-solution
    oracle; study drivers fill it by self-refinement in that case.
    """
    problem = cfg.problem
    system = build_system(
        problem.kernel,
        grid,
        problem.nonlinearity,
        blow_up_threshold=cfg.blow_up_threshold,
        fast_mode=cfg.fast_mode,
    )
    if problem.wave is not None:
        init = initial_data(problem.wave, grid)
    elif problem.initial_profile is not None:
        init = restrict(problem.initial_profile, grid)
    else:
        raise ValueError("the problem carries neither a wave nor an initial profile")
    start = time.perf_counter()
    traj = integrate(system, init, cfg.t_end, cfg.snapshots(), cfg.integrator)
    wall = time.perf_counter() - start
    err = (
        linf_error(traj.final, problem.wave, traj.times[-1])
        if problem.wave is not None
        else math.nan
    )
    record = ErrorRecord(
        h=grid.h,
        n_half=grid.n_half,
        t=traj.times[-1],
        linf_error=err,
        accepted_steps=traj.accepted_steps,
        wall_time=wall,
    )
    return traj, record


@dataclass(frozen=True)
class ProfileStudy:
    """Profile-comparison output: snapshots plus the final error record."""

    trajectory: Trajectory
    record: ErrorRecord
    exact_final: SampledSequence | None
    mass_initial: float
    mass_final: float

    @property
    def relative_mass_drift(self) -> float:
        if self.mass_initial == 0.0:
            return abs(self.mass_final - self.mass_initial)
        return abs(self.mass_final - self.mass_initial) / abs(self.mass_initial)


def run_profile_study(cfg: StudyConfig) -> ProfileStudy:
    """One run at the configured resolution, with exact overlays."""
    grid = cfg.grid()
    traj, record = run_single(cfg, grid)
    exact_final = None
    if cfg.problem.wave is not None:
        exact_final = SampledSequence(
            grid, evaluate_solitary(cfg.problem.wave, grid.nodes, traj.times[-1])
        )
    return ProfileStudy(
        trajectory=traj,
        record=record,
        exact_final=exact_final,
        mass_initial=discrete_mass(traj.states[0]),
        mass_final=discrete_mass(traj.final),
    )


def _pool_map(fn, items, workers):
    if workers is not None and workers == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def run_h_refinement(
    cfg: StudyConfig, h_values, workers: int | None = None
) -> list[tuple[ErrorRecord, RateEstimate | None]]:
    """Fixed-domain error sweep over decreasing mesh sizes.

    Each h must divide the domain half-width evenly.  For problems without
    an exact wave, errors are Richardson-style gaps against one extra
    reference run at half the finest h, compared on shared nodes.
    """
    h_values = list(h_values)
    if any(h2 >= h1 for h1, h2 in zip(h_values, h_values[1:])):
        raise ValueError("h values must be strictly decreasing")
    grids = [cfg.grid(h=h) for h in h_values]

    results = _pool_map(lambda g: run_single(cfg, g), grids, workers)
    records = [rec for _, rec in results]

    if cfg.problem.wave is None:
        ref_grid = cfg.grid(h=h_values[-1] / 2.0)
        ref_traj, _ = run_single(cfg, ref_grid)
        ref = ref_traj.final
        fixed = []
        for (traj, rec), grid in zip(results, grids):
            stride = round(grid.h / ref_grid.h)
            if stride < 1 or abs(stride * ref_grid.h - grid.h) > 1e-12 * grid.h:
                raise ValueError("self-refinement requires nested grids")
            shared = ref.values[::stride]
            if shared.size != grid.node_count:
                raise ValueError("self-refinement requires nested grids")
            err = float(np.max(np.abs(traj.final.values - shared)))
            fixed.append(
                ErrorRecord(rec.h, rec.n_half, rec.t, err,
                            rec.accepted_steps, rec.wall_time)
            )
        records = fixed

    out: list[tuple[ErrorRecord, RateEstimate | None]] = []
    prev = None
    for rec in sorted(records, key=lambda r: -r.h):
        rate = convergence_rate(prev, rec) if prev is not None else None
        out.append((rec, rate))
        prev = rec
    return out


@dataclass(frozen=True)
class TruncationRecord:
    """Error record plus the boundary-band diagnostics of one domain size."""

    record: ErrorRecord
    domain_half_width: float
    delta: float  # sup of |v| over the boundary band, over all snapshots
    eps_delta: float  # max |f| over [-delta, delta]


def _boundary_band_sup(traj: Trajectory, band_fraction: float) -> float:
    n = traj.states[0].grid.node_count
    band = max(1, int(round(band_fraction * n)))
    sup = 0.0
    for state in traj.states:
        v = state.values
        sup = max(sup, float(np.max(np.abs(v[:band]))),
                  float(np.max(np.abs(v[-band:]))))
    return sup


def run_truncation_study(
    cfg: StudyConfig,
    n_values,
    workers: int | None = None,
    band_fraction: float = 0.05,
) -> list[TruncationRecord]:
    """Fixed-h error sweep over the number of grid points.

    The domain ``[-N h, N h]`` grows with N; the boundary band (outermost
    ``band_fraction`` of nodes on each side) yields the diagnostics
    ``delta`` (band amplitude over all snapshots) and ``eps_delta``
    (max |f| over ``[-delta, delta]``).
    """
    n_values = list(n_values)
    if any(n2 <= n1 for n1, n2 in zip(n_values, n_values[1:])):
        raise ValueError("N values must be strictly increasing")
    if cfg.problem.wave is None:
        raise ValueError("the truncation study needs an exact-solution oracle")

    def one(n_half: int) -> TruncationRecord:
        grid = cfg.grid(n_half=n_half)
        traj, rec = run_single(cfg, grid)
        delta = _boundary_band_sup(traj, band_fraction)
        eps = cfg.problem.nonlinearity.max_abs_on_interval(delta)
        return TruncationRecord(
            record=rec,
            domain_half_width=grid.half_width,
            delta=delta,
            eps_delta=eps,
        )

    results = _pool_map(one, n_values, workers)
    return sorted(results, key=lambda r: r.record.n_half)


def plateau_onset(records: list[TruncationRecord], ratio: float = 0.9) -> int | None:
    """First N at which the next error stops improving by more than ``ratio``.

    Returns the N of the first pair whose successive error ratio exceeds
    the threshold, or None when the errors keep falling throughout.
    """
    for a, b in zip(records, records[1:]):
        if b.record.linf_error / a.record.linf_error > ratio:
            return a.record.n_half
    return None
