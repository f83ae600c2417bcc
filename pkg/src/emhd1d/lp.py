"""Dyadic (Littlewood-Paley) decomposition and shell-resolved Sobolev norms.

The smooth low-pass profile chi equals 1 on |xi| <= 3/4 and vanishes for
|xi| >= 1; the shell profile is phi(xi) = chi(xi/2) - chi(xi).  Shell q >= 0
restricts to |xi| ~ 2^q and shell q = -1 is the chi block.  The profiles
telescope, so the resolved shells form an exact partition of unity on the
grid's dealiased band.

Also contains empirical sanity harnesses for the Bernstein and commutator
inequalities used by the energy estimates: they report worst-case
left/right-hand-side ratios over random band-limited fields.  These are
bounded-ratio checks, not constant verifications.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .spectral import (
    GridSpec,
    SpectralField,
    derivative,
    frac_laplacian,
    product,
    riesz_potential,
)


def _bump(t: np.ndarray) -> np.ndarray:
    """exp(-1/t) for t > 0, else 0 (the standard C-infinity mollifier leg)."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smooth_step(t: np.ndarray) -> np.ndarray:
    """C-infinity ramp: 0 for t <= 0, 1 for t >= 1, strictly monotone between."""
    g, g1 = _bump(t), _bump(1.0 - np.asarray(t, dtype=float))
    return g / (g + g1)


def chi_profile(xi: np.ndarray) -> np.ndarray:
    """Low-pass profile: 1 on |xi| <= 3/4, 0 on |xi| >= 1, smooth bridge."""
    return smooth_step((1.0 - np.abs(xi)) / 0.25)


def phi_profile(xi: np.ndarray) -> np.ndarray:
    """Shell profile phi(xi) = chi(xi/2) - chi(xi), supported on 3/4 <= |xi| <= 2."""
    return chi_profile(np.asarray(xi) / 2.0) - chi_profile(xi)


@dataclass(frozen=True)
class LPCutoffs:
    """Shell multiplier tables for one grid.

    ``weight(q)`` returns the diagonal multiplier of the projection Delta_q
    on the grid's wavenumbers; q = -1 is the chi block and shells above
    ``q_max`` are identically zero on the (dealiased) grid.
    """

    grid: GridSpec
    q_max: int = field(init=False)
    _weights: dict = field(init=False, repr=False)

    def __post_init__(self) -> None:
        xi_max = self.grid.xi_max_dealiased
        q_max = int(math.ceil(math.log2(xi_max)))
        xi = self.grid.wavenumbers
        weights = {-1: chi_profile(xi)}
        for q in range(0, q_max + 1):
            weights[q] = phi_profile(xi / 2.0**q)
        for w in weights.values():
            w.flags.writeable = False
        object.__setattr__(self, "q_max", q_max)
        object.__setattr__(self, "_weights", weights)

    def weight(self, q: int) -> np.ndarray:
        if q < -1 or q > self.q_max:
            raise ValueError(f"shell index {q} outside [-1, {self.q_max}]")
        return self._weights[q]

    def shells(self) -> range:
        return range(-1, self.q_max + 1)


@dataclass(frozen=True)
class ShellSpectrum:
    """Per-shell weighted L2 masses lambda_q^(2s) ||Delta_q f||^2 and their sum."""

    s: float
    q_min: int
    masses: np.ndarray

    @property
    def total(self) -> float:
        return float(np.sum(self.masses))


def project_shell(f: SpectralField, q: int, cutoffs: LPCutoffs | None = None) -> SpectralField:
    """Littlewood-Paley projection Delta_q f (q = -1 is the low block)."""
    cut = cutoffs if cutoffs is not None else LPCutoffs(f.grid)
    return SpectralField.from_coef(f.grid, cut.weight(q) * f.coef)


def shell_spectrum(f: SpectralField, s: float, cutoffs: LPCutoffs | None = None) -> ShellSpectrum:
    cut = cutoffs if cutoffs is not None else LPCutoffs(f.grid)
    twoL = 2.0 * f.grid.half_length
    masses = np.array(
        [
            (2.0**q) ** (2.0 * s) * twoL * np.sum(np.abs(cut.weight(q) * f.coef) ** 2)
            for q in cut.shells()
        ]
    )
    return ShellSpectrum(s=s, q_min=-1, masses=masses)


def sobolev_norm(f: SpectralField, s: float) -> float:
    """Homogeneous Sobolev norm via the direct multiplier (zero mode excluded).

    This is the reference implementation the shell sum is equivalent to.
    """
    xi = f.grid.wavenumbers
    nz = xi != 0.0
    return float(
        np.sqrt(2.0 * f.grid.half_length * np.sum(np.abs(xi[nz]) ** (2.0 * s) * np.abs(f.coef[nz]) ** 2))
    )


def sobolev_norm_inhom(f: SpectralField, s: float) -> float:
    """Inhomogeneous H^s norm, multiplier (1 + xi^2)^(s/2)."""
    xi = f.grid.wavenumbers
    return float(
        np.sqrt(2.0 * f.grid.half_length * np.sum((1.0 + xi**2) ** s * np.abs(f.coef) ** 2))
    )


def lp_norm(f: SpectralField, p: float) -> float:
    """L^p norm by trapezoidal quadrature (exact mean of |f|^p on the uniform grid)."""
    return float((np.mean(np.abs(f.phys) ** p) * 2.0 * f.grid.half_length) ** (1.0 / p))


def random_band_limited(
    grid: GridSpec,
    rng: np.random.Generator,
    k_max: int | None = None,
    decay: float = 0.2,
) -> SpectralField:
    """Random real zero-mean field with mildly decaying spectrum, band-limited
    well inside the dealias cutoff so quadratic products stay exact."""
    N = grid.n_modes
    if k_max is None:
        k_max = int(grid.dealias_fraction * N / 2) // 2
    k_max = max(1, min(k_max, N // 2 - 1))
    kk = np.arange(1, k_max + 1)
    amp = (rng.standard_normal(k_max) + 1j * rng.standard_normal(k_max)) * np.exp(-decay * kk)
    coef = np.zeros(N, dtype=complex)
    coef[kk] = amp
    coef[-kk] = np.conj(amp)
    return SpectralField.from_coef(grid, coef)


def random_shell_field(
    grid: GridSpec, q: int, rng: np.random.Generator, cutoffs: LPCutoffs
) -> SpectralField:
    """Random field localized to shell q (white coefficients shaped by phi_q)."""
    N = grid.n_modes
    re = rng.standard_normal(N)
    im = rng.standard_normal(N)
    coef = (re + 1j * im) * cutoffs.weight(q)
    coef = 0.5 * (coef + np.conj(np.roll(coef[::-1], 1)))  # hermitian symmetrize
    coef[0] = 0.0
    if N % 2 == 0:
        coef[N // 2] = np.real(coef[N // 2])
    return SpectralField.from_coef(grid, coef)


@dataclass(frozen=True)
class BoundReport:
    """Worst observed LHS/RHS ratios of an inequality over random trials."""

    name: str
    trials: int
    max_ratio: float
    ratios: np.ndarray

    def as_dict(self) -> dict:
        return {"name": self.name, "trials": self.trials, "max_ratio": self.max_ratio}


def bernstein_check(
    grid: GridSpec, trials: int = 50, seed: int = 0, cutoffs: LPCutoffs | None = None
) -> tuple[BoundReport, BoundReport]:
    """Empirical Bernstein constants on shell-localized fields.

    Checks ||d/dx f_q||_2 <= C 2^q ||f_q||_2 and
    ||f_q||_inf <= C 2^(q/2) ||f_q||_2.
    """
    cut = cutoffs if cutoffs is not None else LPCutoffs(grid)
    rng = np.random.default_rng(seed)
    r_deriv, r_inf = [], []
    for _ in range(trials):
        q = int(rng.integers(0, cut.q_max))
        f = random_shell_field(grid, q, rng, cut)
        n2 = f.l2_norm()
        if n2 == 0.0:
            continue
        lam_q = 2.0**q
        r_deriv.append(derivative(f).l2_norm() / (lam_q * n2))
        r_inf.append(f.linf_norm() / (lam_q**0.5 * n2))
    rep1 = BoundReport("bernstein_derivative", trials, float(np.max(r_deriv)), np.array(r_deriv))
    rep2 = BoundReport("bernstein_linf", trials, float(np.max(r_inf)), np.array(r_inf))
    return rep1, rep2


def commutator_check(
    grid: GridSpec,
    trials: int = 30,
    seed: int = 0,
    eps: float = 0.1,
    cutoffs: LPCutoffs | None = None,
) -> tuple[BoundReport, BoundReport]:
    """Bounded-ratio harness for the two commutator estimates.

    First: || [Delta_q, f] g ||_2 against
    2^(-q(r1 + r2 - 1/2)) ||f||_{H^r1} ||g||_{H^r2} with r1 = 1/2 and
    r2 = -1/2 + eps (the parameter choice the energy estimates use; the
    summable c_q sequence is absorbed into the reported ratio).

    Second (Coifman-Meyer type): || [Lambda^(1/2), f] g ||_2 against
    ||Lambda^sigma f||_{r1} ||I_(sigma - 1/2) g||_{r2} with sigma = 1 - eps,
    r2 = 2 + eps and 1/r1 = 1/2 - 1/r2.
    """
    cut = cutoffs if cutoffs is not None else LPCutoffs(grid)
    rng = np.random.default_rng(seed)
    r1s, r2s = 0.5, -0.5 + eps
    sigma = 1.0 - eps
    p2 = 2.0 + eps
    p1 = 1.0 / (0.5 - 1.0 / p2)
    ratios_lp, ratios_cm = [], []
    for _ in range(trials):
        f = random_band_limited(grid, rng)
        g = random_band_limited(grid, rng)

        q = int(rng.integers(0, cut.q_max))
        # [Delta_q, f] g = Delta_q(fg) - f Delta_q(g)
        comm = SpectralField.from_coef(
            grid,
            project_shell(product(f, g), q, cut).coef - product(f, project_shell(g, q, cut)).coef,
        )
        lhs = comm.l2_norm()
        rhs = (2.0**q) ** (-(r1s + r2s - 0.5)) * 2.0 * sobolev_norm(f, r1s) * sobolev_norm(g, r2s)
        if rhs > 0:
            ratios_lp.append(lhs / rhs)

        # [Lambda^gamma, f] g with gamma = 1/2
        half = 0.5
        comm2 = SpectralField.from_coef(
            grid,
            frac_laplacian(product(f, g), half).coef - product(f, frac_laplacian(g, half)).coef,
        )
        lhs2 = comm2.l2_norm()
        rhs2 = lp_norm(frac_laplacian(f, sigma), p1) * lp_norm(riesz_potential(g, sigma - half), p2)
        if rhs2 > 0:
            ratios_cm.append(lhs2 / rhs2)
    rep_lp = BoundReport("commutator_shell", trials, float(np.max(ratios_lp)), np.array(ratios_lp))
    rep_cm = BoundReport("commutator_frac", trials, float(np.max(ratios_cm)), np.array(ratios_cm))
    return rep_lp, rep_cm


def norm_equivalence_ratio(
    grid: GridSpec, s: float, trials: int = 100, seed: int = 0, cutoffs: LPCutoffs | None = None
) -> tuple[float, float]:
    """Range [c, C] of sqrt(ShellSpectrum.total) / sobolev_norm over random fields."""
    cut = cutoffs if cutoffs is not None else LPCutoffs(grid)
    rng = np.random.default_rng(seed)
    ratios = []
    for _ in range(trials):
        f = random_band_limited(grid, rng, decay=float(rng.uniform(0.02, 0.5)))
        direct = sobolev_norm(f, s)
        if direct == 0.0:
            continue
        ratios.append(np.sqrt(shell_spectrum(f, s, cut).total) / direct)
    return float(np.min(ratios)), float(np.max(ratios))
