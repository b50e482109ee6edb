"""Error metrics, rate fitting and the study drivers on small fast runs."""

import math

import numpy as np
import pytest

from nlwave import (
    DegenerateRateError,
    ErrorRecord,
    Grid,
    IntegratorConfig,
    Nonlinearity,
    StudyConfig,
    convergence_rate,
    custom_problem,
    evaluate_solitary,
    fit_observed_order,
    initial_data,
    linf_error,
    plateau_onset,
    run_h_refinement,
    run_profile_study,
    run_truncation_study,
    tabulated_kernel,
)
from nlwave.experiments import TruncationRecord
from nlwave.problems import bbm_problem, rosenau_problem


def record(h, err, n=10, t=1.0):
    return ErrorRecord(h=h, n_half=n, t=t, linf_error=err,
                       accepted_steps=1, wall_time=0.0)


def short_bbm_config(**overrides):
    base = dict(
        problem=bbm_problem(p=1, c=1.8, x0=-5.0),
        domain_half_width=15.0,
        h=0.25,
        t_end=2.0,
    )
    base.update(overrides)
    return StudyConfig(**base)


class TestErrorMetric:
    def test_exact_restriction_has_zero_error(self):
        wave = bbm_problem().wave
        grid = Grid(h=0.25, n_half=40)
        state = initial_data(wave, grid)
        assert linf_error(state, wave, 0.0) == 0.0

    def test_constant_offset(self):
        wave = bbm_problem().wave
        grid = Grid(h=0.25, n_half=40)
        state = initial_data(wave, grid)
        from nlwave import SampledSequence

        shifted = SampledSequence(grid, state.values + 1e-3)
        assert linf_error(shifted, wave, 0.0) == pytest.approx(1e-3, rel=1e-9)


class TestConvergenceRate:
    def test_quadratic_identity(self):
        r = convergence_rate(record(0.2, 0.04), record(0.1, 0.01))
        assert r.rho == pytest.approx(2.0, abs=1e-14)
        assert r.h_pair == (0.2, 0.1)

    def test_linear_identity(self):
        r = convergence_rate(record(0.2, 0.2), record(0.1, 0.1))
        assert r.rho == pytest.approx(1.0, abs=1e-14)

    def test_zero_error_is_degenerate(self):
        with pytest.raises(DegenerateRateError):
            convergence_rate(record(0.2, 0.0), record(0.1, 1e-3))

    def test_equal_h_rejected(self):
        with pytest.raises(ValueError):
            convergence_rate(record(0.1, 0.1), record(0.1, 0.05))


class TestFitObservedOrder:
    def test_clean_power_law(self):
        hs = [0.4, 0.2, 0.1]
        errs = [0.16, 0.04, 0.01]
        assert fit_observed_order(hs, errs) == pytest.approx(2.0, abs=1e-12)

    def test_noise_floor_filtering(self):
        hs = [0.4, 0.2, 0.1, 0.05]
        errs = [0.16, 0.04, 1e-15, 2e-15]
        order = fit_observed_order(hs, errs, noise_floor=1e-13)
        assert order == pytest.approx(2.0, abs=1e-12)

    def test_all_below_floor_reports_inf(self):
        assert fit_observed_order([0.4, 0.2], [1e-16, 2e-16],
                                  noise_floor=1e-13) == math.inf


class TestStudyConfig:
    def test_grid_from_h(self):
        cfg = short_bbm_config()
        assert cfg.grid().n_half == 60
        assert cfg.grid(h=0.125).n_half == 120

    def test_grid_rejects_non_divisor(self):
        with pytest.raises(ValueError):
            short_bbm_config().grid(h=0.4)

    def test_default_snapshots(self):
        assert short_bbm_config().snapshots() == (0.0, 2.0)


class TestProfileStudy:
    def test_short_run_fields(self):
        study = run_profile_study(short_bbm_config())
        assert study.record.h == 0.25
        assert study.record.t == 2.0
        assert 0.0 < study.record.linf_error < 0.1
        assert study.record.accepted_steps > 0
        assert study.exact_final is not None
        # the short asymmetric run leaks a little mass through the nearby
        # boundary; the tight conservation checks live in the wide-domain
        # acceptance runs
        assert study.relative_mass_drift < 2e-3
        # the trajectory carries initial and final snapshots
        assert study.trajectory.times == (0.0, 2.0)

    def test_zero_horizon_zero_error(self):
        study = run_profile_study(short_bbm_config(t_end=0.0))
        assert study.record.linf_error == 0.0
        assert study.trajectory.times == (0.0,)


class TestHRefinement:
    def test_rates_near_two(self):
        entries = run_h_refinement(short_bbm_config(), [0.5, 0.25, 0.125])
        errors = [rec.linf_error for rec, _ in entries]
        assert errors[0] > errors[1] > errors[2]
        rates = [rate.rho for _, rate in entries if rate is not None]
        assert len(rates) == 2
        for rho in rates:
            assert 1.7 <= rho <= 2.3
        # reported rates reproduce the formula applied to the records
        for (r1, _), (r2, rate) in zip(entries, entries[1:]):
            assert rate.rho == convergence_rate(r1, r2).rho

    def test_single_h_has_no_rate(self):
        entries = run_h_refinement(short_bbm_config(), [0.25])
        assert len(entries) == 1
        assert entries[0][1] is None

    def test_non_decreasing_list_rejected(self):
        with pytest.raises(ValueError):
            run_h_refinement(short_bbm_config(), [0.25, 0.25])

    def test_worker_count_does_not_change_results(self):
        cfg = short_bbm_config()
        seq = run_h_refinement(cfg, [0.5, 0.25], workers=1)
        par = run_h_refinement(cfg, [0.5, 0.25], workers=4)
        for (ra, _), (rb, _) in zip(seq, par):
            assert ra.linf_error == rb.linf_error
            assert ra.accepted_steps == rb.accepted_steps

    def test_self_refinement_for_custom_problem(self):
        # pyramid kernel, weak quadratic nonlinearity, gaussian bump
        nodes = np.linspace(-6.0, 6.0, 241)
        values = np.maximum(0.0, 1.0 - np.abs(nodes) / 6.0) / 6.0
        kernel = tabulated_kernel(nodes, values)
        problem = custom_problem(
            kernel,
            Nonlinearity(((1, 1.0), (2, 0.2))),
            initial_profile=lambda x: np.exp(-(x**2)),
        )
        cfg = StudyConfig(problem=problem, domain_half_width=16.0, h=0.25,
                          t_end=1.0)
        entries = run_h_refinement(cfg, [0.5, 0.25])
        errors = [rec.linf_error for rec, _ in entries]
        assert all(np.isfinite(errors))
        assert errors[1] < errors[0]


class TestTruncationStudy:
    def test_error_decreases_with_domain(self):
        cfg = short_bbm_config(h=0.25, t_end=2.0)
        records = run_truncation_study(cfg, [32, 48, 64])
        errs = [r.record.linf_error for r in records]
        assert errs[0] > errs[-1]
        halves = [r.domain_half_width for r in records]
        assert halves == [8.0, 12.0, 16.0]
        # boundary-band amplitude shrinks as the domain grows
        deltas = [r.delta for r in records]
        assert deltas[-1] < deltas[0]
        assert all(r.eps_delta >= 0 for r in records)

    def test_needs_increasing_n(self):
        with pytest.raises(ValueError):
            run_truncation_study(short_bbm_config(), [64, 48])

    def test_plateau_onset_changepoint(self):
        def trec(n, err):
            return TruncationRecord(
                record=record(0.1, err, n=n), domain_half_width=n * 0.1,
                delta=0.0, eps_delta=0.0,
            )

        records = [trec(200, 1e-1), trec(220, 1e-2), trec(240, 8e-3),
                   trec(260, 7.9e-3)]
        # ratios 0.1, 0.8, 0.9875: the first one past 0.9 is the 240->260 pair
        assert plateau_onset(records) == 240
        falling = [trec(200, 1e-1), trec(220, 1e-2), trec(240, 1e-3)]
        assert plateau_onset(falling) is None


class TestRosenauShortRun:
    def test_profile_accuracy(self):
        cfg = StudyConfig(
            problem=rosenau_problem(x0=0.0),
            domain_half_width=10.0,
            h=0.1,
            t_end=1.0,
        )
        study = run_profile_study(cfg)
        assert study.record.linf_error < 0.05
        peak = float(np.max(study.trajectory.final.values))
        assert abs(peak - 1.0) < 0.02
