"""Time evolution of the 1D electron-MHD models.

Two model kinds are evolved for a mean-free magnetic field B on the torus:

  full:       B_t = -(B J_x - J B_x) - mu Lambda^alpha B,   J = -Lambda B
  transport:  B_t = Lambda B * B_x - mu Lambda^alpha B

Quadratic products are dealiased (2/3 rule) and the nonlinear term is
re-projected onto the zero-mean gauge each evaluation.  The diagonal linear
part mu |xi|^alpha is propagated exactly, either by an integrating factor
wrapped around classical RK4 (default) or by ETDRK4 with contour-quadrature
coefficients; both are exact when the nonlinearity vanishes.

Adaptive stepping enforces the advective CFL dt <= cfl * dx / max|Lambda B|
and additionally caps dt by cfl / max|Lambda B_x| so the local Riccati-type
growth near a singularity stays resolved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Literal

import numpy as np

from .spectral import GridSpec, SpectralField


@dataclass(frozen=True)
class ModelParams:
    """Model kind and coefficients.

    ``nonlinearity`` switches the quadratic term off entirely, leaving the
    pure dissipation semigroup (used by linear-regime diagnostics).
    """

    kind: Literal["full", "transport"]
    mu: float
    alpha: float
    nonlinearity: bool = True

    def __post_init__(self) -> None:
        if self.kind not in ("full", "transport"):
            raise ValueError("kind must be 'full' or 'transport'")
        if self.mu < 0 or self.alpha < 0:
            raise ValueError("mu and alpha must be nonnegative")


@dataclass(frozen=True)
class StepperConfig:
    scheme: Literal["ifrk4", "etdrk4"] = "ifrk4"
    dt_init: float = 1e-3
    cfl_safety: float = 0.5
    t_end: float = 1.0
    max_steps: int = 1_000_000
    blowup_threshold: float = math.inf  # stop once max|Lambda B_x| exceeds it
    adaptive: bool = True
    snapshot_cadence: int = 1  # store a field snapshot every k-th step
    store_step_fields: bool = False  # keep Lambda B (+ d/dt) at every step

    def __post_init__(self) -> None:
        if self.dt_init <= 0 or self.t_end <= 0:
            raise ValueError("dt_init and t_end must be positive")
        if not 0.0 < self.cfl_safety <= 1.0:
            raise ValueError("cfl_safety must lie in (0, 1]")
        if self.scheme not in ("ifrk4", "etdrk4"):
            raise ValueError("unknown scheme")


class CFLCollapse(RuntimeError):
    """Adaptive step shrank below 1e-12 (treated as a blowup indicator)."""


class _Ops:
    """Per-grid multiplier tables shared by all steppers."""

    def __init__(self, grid: GridSpec, params: ModelParams):
        self.grid = grid
        self.params = params
        self.xi = grid.wavenumbers
        self.absxi = np.abs(self.xi)
        self.ddx = 1j * self.xi
        self.mask = grid.dealias_mask
        self.lin = params.mu * self.absxi**params.alpha
        self.lin[0] = 0.0

    def to_phys(self, c: np.ndarray) -> np.ndarray:
        return self.grid.to_phys(c)

    def to_coef(self, p: np.ndarray) -> np.ndarray:
        return self.grid.to_coef(p)

    def nonlinear(self, c: np.ndarray) -> np.ndarray:
        """Dealiased, mean-free quadratic term of the chosen model."""
        if not self.params.nonlinearity:
            return np.zeros_like(c)
        lam_b = self.to_phys(self.absxi * c)
        b_x = self.to_phys(self.ddx * c)
        if self.params.kind == "transport":
            out = self.to_coef(lam_b * b_x)
        else:
            # -(B J_x - J B_x) with J = -Lambda B
            b = self.to_phys(c)
            lam_bx = self.to_phys(self.absxi * self.ddx * c)
            out = self.to_coef(b * lam_bx - lam_b * b_x)
        out *= self.mask
        out[0] = 0.0
        return out

    def rhs(self, c: np.ndarray) -> np.ndarray:
        return self.nonlinear(c) - self.lin * c


def rhs(B: SpectralField, params: ModelParams) -> SpectralField:
    """Full right-hand side dB/dt, dealiased and mean-free."""
    ops = _Ops(B.grid, params)
    return SpectralField.from_coef(B.grid, ops.rhs(B.coef))


def _etdrk4_coeffs(lin: np.ndarray, dt: float, n_contour: int = 32):
    """Cox-Matthews coefficients by contour quadrature (Kassam-Trefethen)."""
    z = -dt * lin
    roots = np.exp(1j * np.pi * (np.arange(n_contour) + 0.5) / n_contour)
    lr = z[:, None] + roots[None, :]
    e_half = np.exp(z / 2.0)
    e_full = np.exp(z)
    q = dt * np.real(((np.exp(lr / 2.0) - 1.0) / lr).mean(1))
    f1 = dt * np.real(((-4.0 - lr + np.exp(lr) * (4.0 - 3.0 * lr + lr**2)) / lr**3).mean(1))
    f2 = dt * np.real(((2.0 + lr + np.exp(lr) * (lr - 2.0)) / lr**3).mean(1))
    f3 = dt * np.real(((-4.0 - 3.0 * lr - lr**2 + np.exp(lr) * (4.0 - lr)) / lr**3).mean(1))
    return e_half, e_full, q, f1, f2, f3


def _step_ifrk4(ops: _Ops, c: np.ndarray, dt: float, k1: np.ndarray | None = None) -> np.ndarray:
    e_full = np.exp(-dt * ops.lin)
    e_half = np.exp(-0.5 * dt * ops.lin)
    if k1 is None:
        k1 = ops.nonlinear(c)
    k2 = ops.nonlinear(e_half * (c + 0.5 * dt * k1))
    k3 = ops.nonlinear(e_half * c + 0.5 * dt * k2)
    k4 = ops.nonlinear(e_full * c + dt * e_half * k3)
    return e_full * c + dt / 6.0 * (e_full * k1 + 2.0 * e_half * (k2 + k3) + k4)


def _step_etdrk4(ops: _Ops, c: np.ndarray, dt: float, k1: np.ndarray | None = None) -> np.ndarray:
    e_half, e_full, q, f1, f2, f3 = _etdrk4_coeffs(ops.lin, dt)
    n0 = k1 if k1 is not None else ops.nonlinear(c)
    a = e_half * c + q * n0
    na = ops.nonlinear(a)
    b = e_half * c + q * na
    nb = ops.nonlinear(b)
    cc = e_half * a + q * (2.0 * nb - n0)
    nc = ops.nonlinear(cc)
    return e_full * c + f1 * n0 + 2.0 * f2 * (na + nb) + f3 * nc


def step(
    B: SpectralField,
    t: float,
    dt: float,
    params: ModelParams,
    cfg: StepperConfig,
) -> tuple[SpectralField, float]:
    """Advance one step of size dt (no adaptivity); returns (B_next, dt)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    ops = _Ops(B.grid, params)
    stepper = _step_etdrk4 if cfg.scheme == "etdrk4" else _step_ifrk4
    return SpectralField.from_coef(B.grid, stepper(ops, B.coef, dt)), dt


@dataclass
class TimeSeries:
    """Output of :func:`evolve`.

    ``snapshots`` holds (t, field) pairs at the requested cadence (always
    including the initial and final states).  When the run was made with
    ``store_step_fields`` the per-step arrays ``lam_b`` and ``lam_b_dot``
    hold the coefficients of Lambda B and d/dt Lambda B at every accepted
    step boundary; together with ``step_times`` they give a cubic-Hermite
    dense output for trajectory integration.
    """

    grid: GridSpec
    params: ModelParams
    config: StepperConfig
    snapshots: list[tuple[float, SpectralField]]
    step_times: np.ndarray
    diagnostics: dict[str, np.ndarray]
    termination: str
    lam_b: np.ndarray | None = None
    lam_b_dot: np.ndarray | None = None

    @property
    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.snapshots])

    @property
    def final(self) -> SpectralField:
        return self.snapshots[-1][1]

    def snapshot_fields(self) -> list[SpectralField]:
        return [f for _, f in self.snapshots]


StepObserver = Callable[[float, float, np.ndarray, np.ndarray], None]


def evolve(
    B0: SpectralField,
    params: ModelParams,
    cfg: StepperConfig,
    observer: StepObserver | None = None,
) -> TimeSeries:
    """Run until t_end, the blowup threshold, CFL collapse, or max_steps.

    ``observer(t_new, dt, coef_new, rhs_coef_old)`` is called after each
    accepted step.  The termination cause is recorded on the result.
    """
    grid = B0.grid
    ops = _Ops(grid, params)
    stepper = _step_etdrk4 if cfg.scheme == "etdrk4" else _step_ifrk4
    c = B0.coef.copy()
    c[0] = 0.0  # zero-mean gauge
    t = 0.0
    dx = grid.dx

    snaps: list[tuple[float, SpectralField]] = [(0.0, SpectralField.from_coef(grid, c))]
    step_times = [0.0]
    diag: dict[str, list[float]] = {k: [] for k in ("t", "dt", "sup_lam_b", "sup_lam_bx", "mean")}
    lam_b_store: list[np.ndarray] = []
    lam_b_dot_store: list[np.ndarray] = []
    termination = "max_steps"

    def record_fields(c_now: np.ndarray, rhs_now: np.ndarray) -> None:
        lam_b_store.append(ops.absxi * c_now)
        lam_b_dot_store.append(ops.absxi * rhs_now)

    n = 0
    while n < cfg.max_steps:
        nl = ops.nonlinear(c)
        rhs_c = nl - ops.lin * c
        lam_b_phys = ops.to_phys(ops.absxi * c)
        lam_bx_phys = ops.to_phys(ops.absxi * ops.ddx * c)
        sup_lb = float(np.max(np.abs(lam_b_phys)))
        sup_lbx = float(np.max(np.abs(lam_bx_phys)))

        if cfg.store_step_fields and n == 0:
            record_fields(c, rhs_c)
        if sup_lbx > cfg.blowup_threshold:
            termination = "blowup_threshold"
            break
        if t >= cfg.t_end - 1e-14:
            termination = "t_end"
            break

        if cfg.adaptive:
            bound = math.inf
            if sup_lb > 0:
                bound = dx / sup_lb
            if sup_lbx > 0:
                bound = min(bound, 1.0 / sup_lbx)
            dt = cfg.dt_init if not math.isfinite(bound) else min(cfg.cfl_safety * bound, cfg.dt_init * 1e6)
            if not math.isfinite(dt):
                dt = cfg.dt_init
        else:
            dt = cfg.dt_init
        if dt < 1e-12:
            termination = "cfl_collapse"
            break
        dt = min(dt, cfg.t_end - t)

        c = stepper(ops, c, dt, k1=nl)
        drift = float(abs(c[0]))
        c[0] = 0.0
        t += dt
        n += 1

        diag["t"].append(t)
        diag["dt"].append(dt)
        diag["sup_lam_b"].append(sup_lb)
        diag["sup_lam_bx"].append(sup_lbx)
        diag["mean"].append(drift)
        step_times.append(t)
        if cfg.store_step_fields:
            nl_new = ops.nonlinear(c)
            record_fields(c, nl_new - ops.lin * c)
        if observer is not None:
            observer(t, dt, c, rhs_c)
        if n % cfg.snapshot_cadence == 0:
            snaps.append((t, SpectralField.from_coef(grid, c)))

    if snaps[-1][0] != t:
        snaps.append((t, SpectralField.from_coef(grid, c)))
    return TimeSeries(
        grid=grid,
        params=params,
        config=cfg,
        snapshots=snaps,
        step_times=np.array(step_times),
        diagnostics={k: np.array(v) for k, v in diag.items()},
        termination=termination,
        lam_b=np.array(lam_b_store) if cfg.store_step_fields else None,
        lam_b_dot=np.array(lam_b_dot_store) if cfg.store_step_fields else None,
    )


@dataclass
class PicardResult:
    iterates: list[SpectralField]  # final-time field of each iterate
    gap_history: list[float]  # sup-in-time H^s gap between consecutive iterates
    converged: bool
    series: TimeSeries  # per-step series of the last iterate


def picard_solve(
    B0: SpectralField,
    params: ModelParams,
    cfg: StepperConfig,
    k_max: int = 12,
    tol: float = 1e-10,
    s: float | None = None,
) -> PicardResult:
    """Iteratively solve the linearized approximating system.

    Iterate k solves B_t + B^(k-1) J_x - J^(k-1) B_x + mu Lambda^alpha B = 0
    with coefficients frozen from iterate k-1 (B^(-1) = 0, so iterate 0 is
    the pure dissipation semigroup).  Stepping is fixed-dt integrating-factor
    RK4; coefficient fields at stage times come from cubic Hermite
    interpolation of the stored (value, time-derivative) pairs of the
    previous iterate.  Stops when the sup-in-time H^s gap between
    consecutive iterates drops below ``tol``.
    """
    if params.kind != "full" or params.mu <= 0:
        raise ValueError("picard_solve applies to the full model with mu > 0")
    if s is None:
        s = 2.5 - params.alpha + 0.5
    grid = B0.grid
    ops = _Ops(grid, params)
    dt = cfg.dt_init
    m = max(1, int(round(cfg.t_end / dt)))
    dt = cfg.t_end / m
    xi2s = (1.0 + ops.xi**2) ** s
    twoL = 2.0 * grid.half_length

    e_full = np.exp(-dt * ops.lin)
    e_half = np.exp(-0.5 * dt * ops.lin)

    c0 = B0.coef.copy()
    c0[0] = 0.0

    prev_vals: np.ndarray | None = None  # (m+1, N) coefficient history
    prev_dots: np.ndarray | None = None
    gaps: list[float] = []
    finals: list[SpectralField] = []
    converged = False
    vals = np.empty((m + 1, grid.n_modes), dtype=complex)

    def frozen_nl(c: np.ndarray, n: int, tau: float) -> np.ndarray:
        """Nonlinearity linear in c, coefficients from the previous iterate."""
        if prev_vals is None or not params.nonlinearity:
            return np.zeros_like(c)
        if tau == 0.0:
            bc = prev_vals[n]
        elif tau == 1.0:
            bc = prev_vals[n + 1]
        else:
            h00 = 2 * tau**3 - 3 * tau**2 + 1
            h10 = tau**3 - 2 * tau**2 + tau
            h01 = -2 * tau**3 + 3 * tau**2
            h11 = tau**3 - tau**2
            bc = (
                h00 * prev_vals[n]
                + h10 * dt * prev_dots[n]
                + h01 * prev_vals[n + 1]
                + h11 * dt * prev_dots[n + 1]
            )
        # -(B^(k-1) J_x - J^(k-1) B_x), J = -Lambda(.)
        b_prev = ops.to_phys(bc)
        j_prev = ops.to_phys(-ops.absxi * bc)
        j_x = ops.to_phys(-ops.absxi * ops.ddx * c)
        b_x = ops.to_phys(ops.ddx * c)
        out = ops.to_coef(-(b_prev * j_x) + j_prev * b_x)
        out *= ops.mask
        out[0] = 0.0
        return out

    for it in range(k_max + 1):
        dots = np.empty_like(vals)
        c = c0.copy()
        for n in range(m + 1):
            vals[n] = c
            dots[n] = frozen_nl(c, n, 0.0) - ops.lin * c
            if n == m:
                break
            k1 = dots[n].copy() + ops.lin * c  # nonlinear part only
            k2 = frozen_nl(e_half * (c + 0.5 * dt * k1), n, 0.5)
            k3 = frozen_nl(e_half * c + 0.5 * dt * k2, n, 0.5)
            k4 = frozen_nl(e_full * c + dt * e_half * k3, n, 1.0)
            c = e_full * c + dt / 6.0 * (e_full * k1 + 2.0 * e_half * (k2 + k3) + k4)
            c[0] = 0.0
        finals.append(SpectralField.from_coef(grid, vals[m]))
        if prev_vals is not None:
            gap = float(
                np.max(np.sqrt(twoL * np.sum(xi2s * np.abs(vals - prev_vals) ** 2, axis=1)))
            )
            gaps.append(gap)
            if gap < tol:
                converged = True
        prev_vals = vals.copy()
        prev_dots = dots
        if converged:
            break

    times = np.linspace(0.0, cfg.t_end, m + 1)
    snaps = [(float(t), SpectralField.from_coef(grid, prev_vals[n])) for n, t in enumerate(times)]
    series = TimeSeries(
        grid=grid,
        params=params,
        config=replace(cfg, adaptive=False),
        snapshots=snaps,
        step_times=times,
        diagnostics={},
        termination="t_end",
    )
    return PicardResult(iterates=finals, gap_history=gaps, converged=converged, series=series)
