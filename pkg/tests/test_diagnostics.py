"""Norm-series, smoothing-rate, and flux-decomposition tests."""

import numpy as np
import pytest

from emhd1d.diagnostics import (
    flux_balance_defect,
    flux_decomposition,
    flux_defect_ratio,
    l2_budget_defect,
    norm_series,
    rough_datum,
    semigroup_norm_series,
    smoothing_rate_fit,
    smoothing_rate_fit_semigroup,
)
from emhd1d.lp import LPCutoffs, sobolev_norm_inhom
from emhd1d.solver import ModelParams, StepperConfig, evolve
from emhd1d.spectral import GridSpec, SpectralField, remove_mean


@pytest.fixture
def grid():
    return GridSpec(np.pi, 256)


def small_datum(grid, amp=0.05):
    return SpectralField.from_function(grid, lambda x: amp * (np.sin(x) + 0.4 * np.sin(3 * x)))


class TestNormSeries:
    def test_zero_run(self, grid):
        p = ModelParams(kind="full", mu=1.0, alpha=2.0)
        cfg = StepperConfig(dt_init=1e-3, t_end=0.01, adaptive=False)
        run = evolve(SpectralField.zero(grid), p, cfg)
        ns = norm_series(run, [0.0, 1.0])
        assert np.all(ns.hs == 0.0) and np.all(ns.budget == 0.0)

    def test_pure_dissipation_single_mode_decay(self, grid):
        # every norm of exp(-mu t Lambda^alpha) cos(2x) decays as exp(-mu 2^a t)
        p = ModelParams(kind="full", mu=1.0, alpha=2.0, nonlinearity=False)
        cfg = StepperConfig(dt_init=1e-3, t_end=0.05, adaptive=False, snapshot_cadence=10)
        f = SpectralField.from_function(grid, lambda x: np.cos(2.0 * x))
        run = evolve(f, p, cfg)
        ns = norm_series(run, [1.0])
        expected = ns.hs[0, 0] * np.exp(-4.0 * ns.times)
        assert np.allclose(ns.hs[0], expected, rtol=1e-10)

    def test_budget_monotone(self, grid):
        p = ModelParams(kind="full", mu=1.0, alpha=2.0)
        cfg = StepperConfig(dt_init=1e-3, t_end=0.05, adaptive=False)
        run = evolve(small_datum(grid), p, cfg)
        ns = norm_series(run, [0.5])
        assert np.all(np.diff(ns.budget[0]) >= 0.0)

    def test_l2_budget_second_order_in_dt(self, grid):
        p = ModelParams(kind="full", mu=1.0, alpha=2.0)
        B0 = small_datum(grid)
        defs = []
        for dt in (2e-3, 5e-4):
            cfg = StepperConfig(dt_init=dt, t_end=0.2, adaptive=False, snapshot_cadence=1)
            defs.append(np.max(np.abs(l2_budget_defect(evolve(B0, p, cfg)))))
        assert defs[0] / defs[1] > 4.0  # dt shrank 4x => defect should drop >= 16x ideally


class TestRoughDatum:
    def test_scaled_to_requested_norm(self, grid):
        f = rough_datum(grid, s_base=0.5, norm=0.05, seed=3)
        assert sobolev_norm_inhom(f, 0.5) == pytest.approx(0.05, rel=1e-12)

    def test_deterministic_in_seed(self, grid):
        a = rough_datum(grid, 0.5, seed=9)
        b = rough_datum(grid, 0.5, seed=9)
        c = rough_datum(grid, 0.5, seed=10)
        assert np.array_equal(a.coef, b.coef)
        assert not np.array_equal(a.coef, c.coef)

    def test_spectral_tail_profile(self, grid):
        f = rough_datum(grid, s_base=0.5, seed=0)
        xi = grid.wavenumbers
        k = np.array([4, 16, 64])
        mags = np.abs(f.coef[k])
        # |coef| ~ |xi|^(-1) on the pi-torus: ratio of magnitudes ~ ratio of k
        assert mags[0] / mags[1] == pytest.approx(4.0, rel=0.05)
        assert mags[1] / mags[2] == pytest.approx(4.0, rel=0.05)


class TestSmoothing:
    def test_semigroup_oracle_matches_analytic_single_mode(self, grid):
        f = SpectralField.from_function(grid, lambda x: np.cos(3.0 * x))
        times = np.array([0.0, 0.1, 0.2])
        out = semigroup_norm_series(f, mu=1.0, alpha=2.0, times=times, s=1.0)
        assert np.allclose(out, 3.0 * np.sqrt(np.pi) * np.exp(-9.0 * times), rtol=1e-12)

    def test_equal_indices_give_zero_exponent(self):
        g = GridSpec(np.pi, 1024)
        B0 = rough_datum(g, s_base=0.5, seed=0)
        fit = smoothing_rate_fit_semigroup(B0, 1.0, 2.0, 0.5, 0.5)
        # s_target = s_base: the norm is finite at t = 0, so no blowup rate;
        # low-frequency dissipation still bleeds a small residual slope
        assert abs(fit.exponent_est) < 0.1
        assert fit.expected == 0.0

    def test_linear_run_matches_semigroup_oracle(self):
        g = GridSpec(np.pi, 1024)
        B0 = rough_datum(g, s_base=0.5, seed=0)
        p = ModelParams(kind="full", mu=1.0, alpha=2.0, nonlinearity=False)
        cfg = StepperConfig(dt_init=2e-5, t_end=1.1e-2, adaptive=False, snapshot_cadence=5)
        run = evolve(B0, p, cfg)
        fit = smoothing_rate_fit(run, 0.5, 1.5, 2.0)
        oracle = smoothing_rate_fit_semigroup(B0, 1.0, 2.0, 0.5, 1.5)
        assert abs(fit.exponent_est - oracle.exponent_est) <= 1e-3

    def test_fit_window_needs_samples(self, grid):
        p = ModelParams(kind="full", mu=1.0, alpha=2.0)
        cfg = StepperConfig(dt_init=1e-3, t_end=5e-3, adaptive=False)
        run = evolve(small_datum(grid), p, cfg)
        with pytest.raises(ValueError):
            smoothing_rate_fit(run, 0.5, 1.5, 2.0, t_min=1.0)


class TestFlux:
    def test_zero_field(self, grid):
        p = ModelParams(kind="full", mu=1.0, alpha=1.0)
        fd = flux_decomposition(SpectralField.zero(grid), 1.0, p)
        assert fd.I == 0.0 and fd.K == 0.0

    def test_cubic_scaling(self, grid):
        # each integrand is a triple product, so B -> cB scales I, K by c^3
        p = ModelParams(kind="full", mu=1.0, alpha=1.0)
        B = remove_mean(small_datum(grid, amp=0.3))
        fd1 = flux_decomposition(B, 1.0, p)
        B2 = SpectralField.from_coef(grid, 2.0 * B.coef)
        fd2 = flux_decomposition(B2, 1.0, p)
        assert fd2.I == pytest.approx(8.0 * fd1.I, rel=1e-12)
        assert fd2.K == pytest.approx(8.0 * fd1.K, rel=1e-12)

    def test_spatial_balance_exact(self, grid):
        """The shell-weighted energy production of the full model's rhs must
        equal -(I + 2K) - mu D identically in space (no time stepping)."""
        from emhd1d.solver import rhs

        p = ModelParams(kind="full", mu=0.8, alpha=1.5)
        B = remove_mean(small_datum(grid, amp=0.2))
        s = 1.0
        cut = LPCutoffs(grid)
        fd = flux_decomposition(B, s, p, cut)
        r = rhs(B, p)
        twoL = 2.0 * grid.half_length
        production = sum(
            (2.0**q) ** (2.0 * s)
            * twoL
            * float(np.real(np.sum(cut.weight(q) ** 2 * r.coef * np.conj(B.coef))))
            for q in cut.shells()
        )
        assert abs(production + fd.dissipation + fd.I + 2.0 * fd.K) < 1e-12

    def test_defect_second_order_in_dt(self, grid):
        p = ModelParams(kind="full", mu=1.0, alpha=1.5)
        B = remove_mean(small_datum(grid))
        d1, d2, ratio = flux_defect_ratio(B, p, s=1.0, dt=1e-3)
        assert 3.5 <= ratio <= 4.5
        assert d2 < d1

    def test_defect_positive_for_nontrivial_field(self, grid):
        p = ModelParams(kind="full", mu=1.0, alpha=1.5)
        B = remove_mean(small_datum(grid))
        assert flux_balance_defect(B, p, 1.0, 1e-3) > 0.0
