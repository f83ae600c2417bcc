"""Periodic pseudospectral fields and Fourier-multiplier operators.

Fields live on the torus [-L, L) sampled at N equispaced nodes.  A field is
stored both as physical samples and as Fourier coefficients with the
convention

    coef_k = (1/N) * sum_j phys_j * exp(-i xi_k x_j),    xi_k = pi k / L,

so that ``evaluate_at`` is a plain trigonometric sum.  All nonlocal operators
(Hilbert transform, fractional Laplacian, Riesz potential) are exact diagonal
multipliers in this basis.  The Hilbert transform uses m(xi) = -i sgn(xi),
the unique sign choice for which Lambda = H d/dx holds with Lambda = |xi|.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on [-half_length, half_length).

    ``n_modes`` is the number of physical samples; it must be even and at
    least 8.  ``dealias_fraction`` sets the cutoff |k| <= frac * N/2 used
    after quadratic products (2/3 rule by default).
    """

    half_length: float
    n_modes: int
    dealias_fraction: float = 2.0 / 3.0

    def __post_init__(self) -> None:
        if self.half_length <= 0:
            raise ValueError("half_length must be positive")
        if self.n_modes < 8 or self.n_modes % 2 != 0:
            raise ValueError("n_modes must be even and >= 8")
        if not 0.0 < self.dealias_fraction <= 1.0:
            raise ValueError("dealias_fraction must lie in (0, 1]")

    @property
    def dx(self) -> float:
        return 2.0 * self.half_length / self.n_modes

    @cached_property
    def nodes(self) -> np.ndarray:
        """Sample points x_j = -L + 2 L j / N."""
        L, N = self.half_length, self.n_modes
        x = -L + 2.0 * L * np.arange(N) / N
        x.flags.writeable = False
        return x

    @cached_property
    def mode_index(self) -> np.ndarray:
        """Integer mode numbers in FFT order: 0, 1, ..., N/2-1, -N/2, ..., -1."""
        k = np.fft.fftfreq(self.n_modes, d=1.0 / self.n_modes)
        k.flags.writeable = False
        return k

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """xi_k = pi k / L in FFT order."""
        xi = np.pi * self.mode_index / self.half_length
        xi.flags.writeable = False
        return xi

    @cached_property
    def _phase(self) -> np.ndarray:
        # exp(i xi_k L) = (-1)^k relates numpy's x0=0 FFT convention to the
        # x0=-L origin of this grid.
        p = (-1.0) ** self.mode_index
        p.flags.writeable = False
        return p

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        cut = self.dealias_fraction * self.n_modes / 2.0
        m = (np.abs(self.mode_index) <= cut).astype(float)
        m.flags.writeable = False
        return m

    @property
    def xi_max_dealiased(self) -> float:
        """Largest wavenumber magnitude surviving the dealias mask."""
        return float(np.max(np.abs(self.wavenumbers) * self.dealias_mask))

    def to_coef(self, phys: np.ndarray) -> np.ndarray:
        return np.fft.fft(phys) / self.n_modes * self._phase

    def to_phys(self, coef: np.ndarray) -> np.ndarray:
        return np.real(np.fft.ifft(coef / self._phase * self.n_modes))


@dataclass(frozen=True)
class SpectralField:
    """Immutable real periodic field: physical samples plus coefficients.

    Construct via :meth:`from_phys`, :meth:`from_coef`, or
    :meth:`from_function`; the two representations are kept consistent by
    construction and the arrays are read-only.
    """

    grid: GridSpec
    phys: np.ndarray
    coef: np.ndarray

    def __post_init__(self) -> None:
        if self.phys.shape != (self.grid.n_modes,):
            raise ValueError("phys has wrong shape for grid")
        if self.coef.shape != (self.grid.n_modes,):
            raise ValueError("coef has wrong shape for grid")
        self.phys.flags.writeable = False
        self.coef.flags.writeable = False

    @classmethod
    def from_phys(cls, grid: GridSpec, phys: np.ndarray) -> "SpectralField":
        phys = np.ascontiguousarray(phys, dtype=float).copy()
        return cls(grid, phys, grid.to_coef(phys))

    @classmethod
    def from_coef(cls, grid: GridSpec, coef: np.ndarray) -> "SpectralField":
        coef = np.ascontiguousarray(coef, dtype=complex).copy()
        return cls(grid, grid.to_phys(coef), coef)

    @classmethod
    def from_function(cls, grid: GridSpec, fn: Callable[[np.ndarray], np.ndarray]) -> "SpectralField":
        return cls.from_phys(grid, fn(grid.nodes))

    @classmethod
    def zero(cls, grid: GridSpec) -> "SpectralField":
        return cls(grid, np.zeros(grid.n_modes), np.zeros(grid.n_modes, dtype=complex))

    @property
    def mean(self) -> float:
        return float(np.real(self.coef[0]))

    def l2_norm(self) -> float:
        """L2 norm on the torus, sqrt(2L sum |coef|^2) by Plancherel."""
        return float(np.sqrt(2.0 * self.grid.half_length * np.sum(np.abs(self.coef) ** 2)))

    def linf_norm(self) -> float:
        return float(np.max(np.abs(self.phys)))


def hilbert(f: SpectralField) -> SpectralField:
    """Hilbert transform, multiplier -i sgn(xi); the zero mode maps to 0."""
    m = -1j * np.sign(f.grid.wavenumbers)
    return SpectralField.from_coef(f.grid, m * f.coef)


def derivative(f: SpectralField, order: int = 1) -> SpectralField:
    """Spatial derivative of the given order, multiplier (i xi)^order."""
    m = (1j * f.grid.wavenumbers) ** order
    return SpectralField.from_coef(f.grid, m * f.coef)


def frac_laplacian(f: SpectralField, alpha: float) -> SpectralField:
    """Fractional Laplacian Lambda^alpha, multiplier |xi|^alpha.

    The zero mode always maps to 0, consistent with the zero-mean gauge
    (also avoids 0^0 = 1 for alpha = 0).
    """
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    m = np.abs(f.grid.wavenumbers) ** alpha
    m[0] = 0.0
    return SpectralField.from_coef(f.grid, m * f.coef)


def riesz_potential(f: SpectralField, r: float) -> SpectralField:
    """Riesz potential, multiplier |xi|^(-r) off the zero mode.

    Inverse to ``frac_laplacian(., r)`` on zero-mean fields.  Only
    0 < r < 1 is accepted.
    """
    if not 0.0 < r < 1.0:
        raise ValueError("riesz_potential requires 0 < r < 1")
    xi = f.grid.wavenumbers
    m = np.zeros_like(xi)
    nz = xi != 0.0
    m[nz] = np.abs(xi[nz]) ** (-r)
    return SpectralField.from_coef(f.grid, m * f.coef)


def dealias(f: SpectralField) -> SpectralField:
    """Zero the coefficients above the grid's dealias cutoff."""
    return SpectralField.from_coef(f.grid, f.coef * f.grid.dealias_mask)


def product(f: SpectralField, g: SpectralField, dealiased: bool = True) -> SpectralField:
    """Pointwise product, dealiased by default (2/3 rule after the product)."""
    if f.grid is not g.grid and f.grid != g.grid:
        raise ValueError("operands live on different grids")
    c = f.grid.to_coef(f.phys * g.phys)
    if dealiased:
        c = c * f.grid.dealias_mask
    return SpectralField.from_coef(f.grid, c)


def remove_mean(f: SpectralField) -> SpectralField:
    c = f.coef.copy()
    c[0] = 0.0
    return SpectralField.from_coef(f.grid, c)


def evaluate_at(f: SpectralField, x: "float | np.ndarray") -> "float | np.ndarray":
    """Evaluate the trigonometric series of ``f`` at arbitrary points.

    Points are reduced mod 2L into [-L, L).  Exact (to roundoff) for any
    band-limited field; agrees with ``phys`` at the grid nodes.
    """
    L = f.grid.half_length
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    xa = np.mod(xa + L, 2.0 * L) - L
    vals = np.real(np.exp(1j * np.outer(xa, f.grid.wavenumbers)) @ f.coef)
    if np.isscalar(x) or np.asarray(x).ndim == 0:
        return float(vals[0])
    return vals
