"""Riccati blowup harness tests.

Frozen oracle values for the reference datum exp(-x^4) sin(x) on the
L = 6 torus, independently derived:

* spectral evaluation of Lambda(dB/dx) at 0 on a fine grid -> 1.7495090293
* principal-value quadrature of (1/pi) PV int (1 - B0'(y))/y^2 dy on the
  real line -> 1.7493995133

The two differ only by the periodic truncation of the integral tails.
"""

import numpy as np
import pytest

from emhd1d.blowup import (
    BlowupDatum,
    DatumError,
    FitWindowError,
    TrajectoryState,
    advect_trajectory,
    locate_datum_peak,
    make_reference_datum,
    measure_blowup_time,
    reference_datum_fn,
    predict_blowup_time,
    pv_blowup_coefficient,
    riccati_invariant_report,
    run_blowup,
)
from emhd1d.spectral import GridSpec, SpectralField

W0_SPECTRAL = 1.7495090293
W0_PV = 1.7493995133


@pytest.fixture(scope="module")
def grid():
    return GridSpec(6.0, 2048)


@pytest.fixture(scope="module")
def datum(grid):
    return make_reference_datum(grid)


@pytest.fixture(scope="module")
def run_and_states(grid, datum):
    run, d = run_blowup(grid, datum=datum)
    return run, d, advect_trajectory(run, d.x0)


class TestDatum:
    def test_w0_matches_frozen_value(self, datum):
        assert datum.w0 == pytest.approx(W0_SPECTRAL, rel=1e-8)

    def test_pv_oracle_matches_frozen_value(self):
        assert pv_blowup_coefficient() == pytest.approx(W0_PV, rel=1e-8)

    def test_spectral_vs_pv_agreement(self, datum):
        assert abs(datum.w0 - W0_PV) / W0_PV <= 1e-4

    def test_validate_passes_reference(self, datum):
        datum.validate()

    def test_validate_rejects_wrong_slope(self, grid):
        bad = SpectralField.from_function(grid, lambda x: 2.0 * reference_datum_fn(x))
        with pytest.raises(DatumError):
            BlowupDatum(B0=bad, x0=0.0, w0=1.0).validate()

    def test_validate_rejects_nonpositive_w0(self, datum):
        with pytest.raises(DatumError):
            BlowupDatum(B0=datum.B0, x0=0.0, w0=-1.0).validate()

    def test_boundary_decay_check(self):
        tight = GridSpec(1.5, 256)  # datum is O(1) at the boundary
        with pytest.raises(DatumError):
            make_reference_datum(tight)

    def test_peak_refinement_finds_origin(self, datum):
        assert abs(locate_datum_peak(datum.B0)) < 1e-6

    def test_predicted_time_is_reciprocal(self, datum):
        assert predict_blowup_time(datum) == 1.0 / datum.w0


class TestTrajectory:
    def test_stays_at_symmetric_point(self, run_and_states):
        # the datum is odd, so Lambda B vanishes at 0 for all time and the
        # characteristic through 0 never moves
        _, _, states = run_and_states
        assert max(abs(s.X) for s in states) < 1e-10

    def test_w_increases_monotonically_early(self, run_and_states):
        _, d, states = run_and_states
        ws = np.array([s.w for s in states])
        early = ws[: len(ws) // 2]
        assert np.all(np.diff(early) > 0)

    def test_requires_stored_fields(self, grid, datum):
        from emhd1d.solver import ModelParams, StepperConfig, evolve

        run = evolve(
            datum.B0,
            ModelParams(kind="transport", mu=1.0, alpha=1.0),
            StepperConfig(dt_init=1e-3, t_end=0.01, adaptive=False),
        )
        with pytest.raises(ValueError):
            advect_trajectory(run, 0.0)


class TestFit:
    def test_riccati_fit(self, run_and_states):
        _, d, states = run_and_states
        t_est, slope, resid = measure_blowup_time(states, d.w0)
        assert slope == pytest.approx(-1.0, abs=0.01)
        assert resid <= 1e-3
        assert abs(t_est - 1.0 / d.w0) / (1.0 / d.w0) <= 0.02

    def test_empty_window_raises(self):
        states = [TrajectoryState(t=0.0, X=0.0, bx=1.0, bxx=0.0, w=1.0)] * 5
        with pytest.raises(FitWindowError):
            measure_blowup_time(states, w0=100.0)

    def test_exact_riccati_sequence_recovered(self):
        # synthetic w(t) = w0/(1 - w0 t) must be fitted essentially exactly
        w0 = 2.0
        ts = np.linspace(0.0, 0.45, 200)
        states = [
            TrajectoryState(t=float(t), X=0.0, bx=1.0, bxx=0.0, w=w0 / (1.0 - w0 * t))
            for t in ts
        ]
        t_est, slope, resid = measure_blowup_time(states, w0)
        assert slope == pytest.approx(-1.0, abs=1e-12)
        assert t_est == pytest.approx(0.5, rel=1e-12)
        assert resid < 1e-14


class TestInvariants:
    def test_pointwise_invariants(self, run_and_states):
        run, d, states = run_and_states
        rep = riccati_invariant_report(run, states, t_max=0.8 / d.w0)
        assert rep.max_bx_defect <= 1e-4
        assert rep.max_bxx_rel <= 1e-4

    def test_bbar_x_property(self):
        s = TrajectoryState(t=0.0, X=0.0, bx=1.25, bxx=0.0, w=1.0)
        assert s.bbar_x == pytest.approx(0.25)
