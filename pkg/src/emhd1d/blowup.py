"""Riccati blowup harness for the transport model with mu = alpha = 1.

For B_t - Lambda B * B_x + Lambda B = 0 and a datum with B_x(x0) = 1,
B_xx(x0) = 0 and w0 = Lambda B_x(x0) > 0, the quantity w = Lambda B_x
transported along dX/dt = -Lambda B(X, t) obeys w' = w^2, so
1/w(t) = 1/w0 - t and w blows up at T = 1/w0.  This module builds the
reference datum exp(-x^4) sin(x), integrates the characteristic through a
solver run, and fits/validates the Riccati law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from .solver import ModelParams, StepperConfig, TimeSeries, evolve
from .spectral import GridSpec, SpectralField, derivative, evaluate_at, frac_laplacian


class DatumError(ValueError):
    """The grid cannot hold the datum or its defining point conditions fail."""


class FitWindowError(RuntimeError):
    """The Riccati fit window contains no samples (run stopped too early)."""


@dataclass(frozen=True)
class BlowupDatum:
    B0: SpectralField
    x0: float
    w0: float

    def validate(self, tol: float = 1e-10) -> None:
        bx = derivative(self.B0)
        bxx = derivative(self.B0, 2)
        bx0 = evaluate_at(bx, self.x0)
        bxx0 = evaluate_at(bxx, self.x0)
        if abs(bx0 - 1.0) > tol:
            raise DatumError(f"B_x(x0) = {bx0}, expected 1")
        if abs(bxx0) > tol:
            raise DatumError(f"B_xx(x0) = {bxx0}, expected 0")
        if self.w0 <= 0:
            raise DatumError("w0 must be positive")
        if np.max(bx.phys) > bx0 + tol:
            raise DatumError("x0 is not the global maximum of B_x on the grid")


@dataclass
class TrajectoryState:
    t: float
    X: float
    bx: float
    bxx: float
    w: float

    @property
    def bbar_x(self) -> float:
        """Slope of the shifted field B - x along the trajectory."""
        return self.bx - 1.0


def reference_datum_fn(x: np.ndarray) -> np.ndarray:
    return np.exp(-(x**4)) * np.sin(x)


def reference_datum_dx(x: np.ndarray) -> np.ndarray:
    return np.exp(-(x**4)) * (np.cos(x) - 4.0 * x**3 * np.sin(x))


def make_reference_datum(grid: GridSpec) -> BlowupDatum:
    """Sample exp(-x^4) sin(x); x0 = 0 exactly by odd symmetry."""
    B0 = SpectralField.from_function(grid, reference_datum_fn)
    L = grid.half_length
    edge = np.max(np.abs(reference_datum_fn(np.array([-L, L - grid.dx]))))
    if edge > 1e-10:
        raise DatumError(f"datum does not decay on [-{L}, {L}): boundary value {edge:.3e}")
    w0 = float(evaluate_at(frac_laplacian(derivative(B0), 1.0), 0.0))
    d = BlowupDatum(B0=B0, x0=0.0, w0=w0)
    d.validate()
    return d


def locate_datum_peak(B0: SpectralField, tol: float = 1e-12) -> float:
    """Golden-section refinement of argmax B_x around the best grid node."""
    bx = derivative(B0)
    j = int(np.argmax(bx.phys))
    dx = B0.grid.dx
    lo, hi = B0.grid.nodes[j] - dx, B0.grid.nodes[j] + dx
    res = minimize_scalar(
        lambda x: -evaluate_at(bx, x), bounds=(lo, hi), method="bounded",
        options={"xatol": tol},
    )
    return float(res.x)


def pv_blowup_coefficient(deriv_fn=reference_datum_dx, cutoff: float = 50.0) -> float:
    """Independent principal-value oracle for w0 = Lambda(dB0/dx)(0).

    Computes (1/pi) PV integral of (1 - B0'(y)) / y^2 over the real line,
    splitting off the analytic 2/cutoff tail where B0' has decayed to zero.
    """

    def integrand(y: float) -> float:
        if abs(y) < 1e-7:
            # removable singularity: B0'(y) = 1 - y^2/2 + O(y^4) for the
            # reference datum; generic even expansion handled by symmetry
            yy = max(abs(y), 1e-7)
            return (1.0 - deriv_fn(yy)) / yy**2
        return (1.0 - deriv_fn(y)) / y**2

    total = 0.0
    for a, b in ((-cutoff, -1.0), (-1.0, 1.0), (1.0, cutoff)):
        val, _ = quad(integrand, a, b, limit=400)
        total += val
    total += 2.0 / cutoff  # exact tail of 1/y^2 beyond the cutoff
    return total / math.pi


def predict_blowup_time(d: BlowupDatum) -> float:
    return 1.0 / d.w0


def run_blowup(
    grid: GridSpec,
    datum: BlowupDatum | None = None,
    cfl_safety: float = 0.5,
    stop_factor: float = 12.0,
    scheme: str = "ifrk4",
) -> tuple[TimeSeries, BlowupDatum]:
    """Evolve the blowup configuration, storing per-step fields for tracking.

    Stops once max|Lambda B_x| exceeds stop_factor * w0, comfortably past the
    Riccati fit window [1.25 w0, 10 w0] but before the discretized field
    saturates; a t_end slightly past the predicted time guards against stall.
    """
    d = datum if datum is not None else make_reference_datum(grid)
    params = ModelParams(kind="transport", mu=1.0, alpha=1.0)
    cfg = StepperConfig(
        scheme=scheme,
        dt_init=1e-4,
        cfl_safety=cfl_safety,
        t_end=1.1 / d.w0,
        blowup_threshold=stop_factor * d.w0,
        store_step_fields=True,
        snapshot_cadence=10**9,
    )
    return evolve(d.B0, params, cfg), d


def _hermite_coef(run: TimeSeries, n: int, tau: float, dt: float) -> np.ndarray:
    if tau == 0.0:
        return run.lam_b[n]
    if tau == 1.0:
        return run.lam_b[n + 1]
    h00 = 2 * tau**3 - 3 * tau**2 + 1
    h10 = tau**3 - 2 * tau**2 + tau
    h01 = -2 * tau**3 + 3 * tau**2
    h11 = tau**3 - tau**2
    return (
        h00 * run.lam_b[n]
        + h10 * dt * run.lam_b_dot[n]
        + h01 * run.lam_b[n + 1]
        + h11 * dt * run.lam_b_dot[n + 1]
    )


def advect_trajectory(run: TimeSeries, x0: float) -> list[TrajectoryState]:
    """Integrate dX/dt = -Lambda B(X, t) through a stored run.

    Uses RK4 with the solver's accepted steps; Lambda B at the half-step
    comes from cubic Hermite interpolation of the stored per-step fields.
    The tracked pointwise quantities are evaluated off-grid from the stored
    Lambda B coefficients (B_x = -H Lambda B, so every derivative is a
    diagonal multiplier away).
    """
    if run.lam_b is None:
        raise ValueError("run was made without store_step_fields")
    grid = run.grid
    xi = grid.wavenumbers
    sgn = np.sign(xi)
    L = grid.half_length

    def eval_coef(coef: np.ndarray, x: float) -> float:
        xr = (x + L) % (2.0 * L) - L
        return float(np.real(np.exp(1j * xi * xr) @ coef))

    states: list[TrajectoryState] = []
    X = x0
    times = run.step_times
    for n in range(len(times)):
        lam = run.lam_b[n]
        bx = eval_coef(1j * sgn * lam, X)  # B_x = -H(Lambda B)
        bxx = eval_coef(1j * xi * (1j * sgn) * lam, X)
        w = eval_coef(1j * xi * lam, X)  # Lambda B_x
        states.append(TrajectoryState(t=float(times[n]), X=X, bx=bx, bxx=bxx, w=w))
        if n == len(times) - 1:
            break
        dt = float(times[n + 1] - times[n])
        f1 = -eval_coef(lam, X)
        f2 = -eval_coef(_hermite_coef(run, n, 0.5, dt), X + 0.5 * dt * f1)
        f3 = -eval_coef(_hermite_coef(run, n, 0.5, dt), X + 0.5 * dt * f2)
        f4 = -eval_coef(run.lam_b[n + 1], X + dt * f3)
        X = X + dt / 6.0 * (f1 + 2.0 * f2 + 2.0 * f3 + f4)
    return states


def measure_blowup_time(
    states: list[TrajectoryState],
    w0: float | None = None,
    window: tuple[float, float] = (1.25, 10.0),
) -> tuple[float, float, float]:
    """Affine fit of 1/w(t) over the window w in [lo, hi] * w0.

    Returns (T_est, slope, rms residual); the slope is -1 for the exact
    Riccati law and T_est is the root of the fitted line.  Only the first
    contiguous crossing of the window is used, so a post-saturation decay of
    w cannot contaminate the fit.
    """
    if w0 is None:
        w0 = states[0].w
    ws = np.array([s.w for s in states])
    ts = np.array([s.t for s in states])
    sel = (ws >= window[0] * w0) & (ws <= window[1] * w0)
    idx = np.flatnonzero(sel)
    if idx.size == 0:
        raise FitWindowError("no samples with w inside the fit window")
    breaks = np.flatnonzero(np.diff(idx) > 1)
    if breaks.size:
        idx = idx[: breaks[0] + 1]
    if idx.size < 3:
        raise FitWindowError("fewer than 3 samples in the fit window")
    tt, iw = ts[idx], 1.0 / ws[idx]
    A = np.column_stack([tt, np.ones_like(tt)])
    (slope, intercept), *_ = np.linalg.lstsq(A, iw, rcond=None)
    resid = float(np.sqrt(np.mean((iw - (slope * tt + intercept)) ** 2)))
    return float(-intercept / slope), float(slope), resid


@dataclass
class RiccatiReport:
    max_bx_defect: float  # max |B_x(X,t) - 1|
    max_bxx_rel: float  # max |B_xx(X,t)| / sup_x |B_xx(x,t)|
    max_bxx_abs: float
    max_riccati_defect: float  # |dw/dt - (w^2 - bxx^2 - (bx-1) B_xxx)|
    t_max: float


def riccati_invariant_report(
    run: TimeSeries, states: list[TrajectoryState], t_max: float | None = None
) -> RiccatiReport:
    """Pointwise invariants along the trajectory up to t_max.

    dw/dt is a centered nonuniform finite difference of the tracked series;
    comparing against the full right side of the transported-w equation
    isolates discretization error from the model identity.
    """
    xi = run.grid.wavenumbers
    sgn = np.sign(xi)
    ts = np.array([s.t for s in states])
    if t_max is None:
        t_max = float(ts[-1])
    sel = ts <= t_max
    bx = np.array([s.bx for s in states])
    bxx = np.array([s.bxx for s in states])
    ws = np.array([s.w for s in states])
    xs = np.array([s.X for s in states])

    sup_bxx = np.array(
        [float(np.max(np.abs(run.grid.to_phys(1j * xi * (1j * sgn) * run.lam_b[n])))) for n in range(len(ts))]
    )
    L = run.grid.half_length
    bxxx = np.array(
        [
            float(
                np.real(
                    np.exp(1j * xi * ((x + L) % (2 * L) - L))
                    @ ((1j * xi) ** 2 * (1j * sgn) * run.lam_b[n])
                )
            )
            for n, x in enumerate(xs)
        ]
    )
    # centered nonuniform three-point derivative of w
    defect = np.full(len(ts), np.nan)
    for n in range(1, len(ts) - 1):
        h1, h2 = ts[n] - ts[n - 1], ts[n + 1] - ts[n]
        dw = (
            -h2 / (h1 * (h1 + h2)) * ws[n - 1]
            + (h2 - h1) / (h1 * h2) * ws[n]
            + h1 / (h2 * (h1 + h2)) * ws[n + 1]
        )
        rhs_w = ws[n] ** 2 - bxx[n] ** 2 - (bx[n] - 1.0) * bxxx[n]
        defect[n] = abs(dw - rhs_w)
    inner = sel & ~np.isnan(defect)
    return RiccatiReport(
        max_bx_defect=float(np.max(np.abs(bx[sel] - 1.0))),
        max_bxx_rel=float(np.max(np.abs(bxx[sel]) / np.maximum(sup_bxx[sel], 1e-300))),
        max_bxx_abs=float(np.max(np.abs(bxx[sel]))),
        max_riccati_defect=float(np.max(defect[inner])) if np.any(inner) else math.nan,
        t_max=t_max,
    )
