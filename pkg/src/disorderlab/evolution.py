"""Free propagation exp(i*Laplacian*t) as an exact Fourier multiplier,
band-limited test functions, and decay-rate fitting for Cook's criterion.

The propagator uses the continuum dispersion exp(-i*|xi|^2*t) on the
periodic grid's wavenumbers: the estimates being probed are continuum
stationary-phase facts, and the grid is only a quadrature device for
band-limited states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import PreconditionError
from .grid import GridSpec
from .potential import BumpProfile

__all__ = [
    "BandLimitedTestFunction",
    "make_test_function",
    "evolve_free",
    "cook_integrand",
    "decay_slope",
    "grid_from_fourier",
    "fourier_from_grid",
]

_bump = BumpProfile()


def bump_1d(v: np.ndarray) -> np.ndarray:
    """The scalar mollifier bump on [-1, 1] (same profile as the islands)."""
    v = np.asarray(v, dtype=float)
    return _bump.value(v.reshape(-1, 1)).reshape(v.shape)


def _bump_l2_sq() -> float:
    # integral of bump(v)^2 over [-1, 1], Gauss-Legendre
    nodes, weights = np.polynomial.legendre.leggauss(80)
    return float(np.sum(weights * bump_1d(nodes) ** 2))


_BUMP_L2_SQ = _bump_l2_sq()


def _freq_grids(grid: GridSpec) -> list:
    return [2.0 * np.pi * np.fft.fftfreq(grid.points_per_axis, d=grid.h)
            for _ in range(grid.dimension)]


def _corner_phases(grid: GridSpec) -> list:
    # e^{i xi * x0} per axis with x0 = -L aligns DFT indexing with the
    # origin-centered coordinates
    phases = []
    for xi in _freq_grids(grid):
        phases.append(np.exp(1j * xi * (-grid.half_length)))
    return phases


def grid_from_fourier(grid: GridSpec, fhat: np.ndarray) -> np.ndarray:
    """Samples of f on the grid from samples of the continuum transform
    fhat on the grid wavenumbers (inverse transform by quadrature)."""
    if grid.boundary != "periodic":
        raise ValueError("Fourier evolution requires a periodic grid")
    arr = np.asarray(fhat, dtype=complex).reshape(grid.shape)
    for axis, ph in enumerate(_corner_phases(grid)):
        sh = [1] * grid.dimension
        sh[axis] = -1
        arr = arr * ph.reshape(sh)
    scale = (grid.points_per_axis / (2.0 * grid.half_length)) ** grid.dimension
    return scale * np.fft.ifftn(arr)


def fourier_from_grid(grid: GridSpec, f: np.ndarray) -> np.ndarray:
    """Continuum-transform samples fhat(xi_k) from grid samples of f."""
    arr = np.fft.fftn(np.asarray(f, dtype=complex).reshape(grid.shape))
    arr = arr * grid.h ** grid.dimension
    for axis, ph in enumerate(_corner_phases(grid)):
        sh = [1] * grid.dimension
        sh[axis] = -1
        arr = arr * np.conj(ph).reshape(sh)
    return arr


@dataclass(frozen=True)
class BandLimitedTestFunction:
    """Unit-norm grid function whose transform is a product of shifted
    mollifier bumps, one per axis, supported away from every coordinate
    axis (and inside the Nyquist band)."""

    grid: GridSpec
    centers: tuple
    width: float
    values: np.ndarray        # grid samples, continuum-normalized

    @property
    def xi_max(self) -> float:
        return max(abs(c) for c in self.centers) + self.width

    def fhat_axis(self, j: int, xi: np.ndarray) -> np.ndarray:
        """Analytic transform factor along axis j (real-valued)."""
        scale = (2.0 * np.pi / (self.width * _BUMP_L2_SQ)) ** 0.5
        return scale * bump_1d((np.asarray(xi) - self.centers[j]) / self.width)

    def fhat(self, xi: np.ndarray) -> np.ndarray:
        """Analytic transform at points xi of shape (..., d)."""
        xi = np.asarray(xi, dtype=float)
        out = np.ones(xi.shape[:-1])
        for j in range(len(self.centers)):
            out = out * self.fhat_axis(j, xi[..., j])
        return out

    def support_interval(self, j: int) -> tuple:
        return (self.centers[j] - self.width, self.centers[j] + self.width)


def make_test_function(grid: GridSpec, centers, width: float,
                       margin: float = 0.1) -> BandLimitedTestFunction:
    """Build the band-limited test function; unit continuum L2 norm.

    Preconditions: each |c_j| > width + margin (support avoids the
    coordinate axes) and |c_j| + width below the grid Nyquist wavenumber.
    """
    centers = tuple(float(c) for c in np.atleast_1d(centers))
    if len(centers) != grid.dimension:
        raise ValueError("one band center per axis required")
    if width <= 0:
        raise ValueError("width must be positive")
    nyquist = math.pi / grid.h
    for c in centers:
        if abs(c) <= width + margin:
            raise PreconditionError(
                f"band [{c - width}, {c + width}] touches a coordinate axis "
                f"(margin {margin})")
        if abs(c) + width >= nyquist:
            raise PreconditionError(
                f"band edge {abs(c) + width} exceeds Nyquist {nyquist:.3f}")
    f = BandLimitedTestFunction(grid, centers, width, None)
    freqs = _freq_grids(grid)
    fhat = np.ones((), dtype=complex)
    arr = np.ones((1,) * grid.dimension, dtype=complex)
    for j, xi in enumerate(freqs):
        sh = [1] * grid.dimension
        sh[j] = -1
        arr = arr * f.fhat_axis(j, xi).reshape(sh)
    values = grid_from_fourier(grid, np.broadcast_to(arr, grid.shape))
    # continuum normalization is analytic; make the grid norm exactly 1
    values = values / (np.linalg.norm(values.reshape(-1))
                       * grid.h ** (grid.dimension / 2.0))
    return BandLimitedTestFunction(grid, centers, width, values)


def _required_half_length(f: BandLimitedTestFunction, t: float) -> float:
    envelope = 8.0 / f.width
    return 2.0 * f.xi_max * abs(t) + envelope


def evolve_free(f, t: float, grid: GridSpec = None,
                enforce_box: bool = True) -> np.ndarray:
    """exp(i*Laplacian*t) f via the continuum symbol; exactly unitary.

    ``f`` is a BandLimitedTestFunction or a grid array (then ``grid`` is
    required).  The box-exit precondition L >= 2*xi_max*|t| + envelope is
    enforced for test functions unless ``enforce_box`` is False.
    """
    if isinstance(f, BandLimitedTestFunction):
        grid = f.grid
        if enforce_box:
            need = _required_half_length(f, t)
            if grid.half_length < need:
                raise PreconditionError(
                    f"wave packet leaves the box at t={t}: need L >= "
                    f"{need:.1f}, have {grid.half_length}")
        values = f.values
    else:
        if grid is None:
            raise ValueError("grid required for raw array input")
        values = f
    fhat = fourier_from_grid(grid, values)
    freqs = _freq_grids(grid)
    for axis, xi in enumerate(freqs):
        sh = [1] * grid.dimension
        sh[axis] = -1
        fhat = fhat * np.exp(-1j * xi ** 2 * t).reshape(sh)
    return grid_from_fourier(grid, fhat)


def grid_norm(grid: GridSpec, f: np.ndarray) -> float:
    """Continuum L2 norm of a grid function (trapezoid on the torus)."""
    return float(np.linalg.norm(np.asarray(f).reshape(-1))
                 * grid.h ** (grid.dimension / 2.0))


def cook_integrand(V, f: BandLimitedTestFunction, t: float) -> float:
    """||V exp(i*Laplacian*t) f|| by grid quadrature.

    ``V`` is either a grid array of multiplication-potential values or a
    callable applying a (projection) potential to a grid function.
    """
    g = evolve_free(f, t)
    grid = f.grid
    if callable(V):
        return grid_norm(grid, V(g))
    return grid_norm(grid, np.asarray(V).reshape(grid.shape) * g)


def decay_slope(ts, values) -> tuple:
    """Log-log least-squares slope of ``values`` against ``ts``.

    Returns (slope, half_width) with a 95% confidence half-width.
    Requires >= 8 time points and strictly positive values.
    """
    ts = np.asarray(ts, dtype=float).reshape(-1)
    values = np.asarray(values, dtype=float).reshape(-1)
    if ts.size < 8:
        raise PreconditionError("decay fit needs at least 8 time points")
    bad = np.nonzero(values <= 0.0)[0]
    if bad.size:
        raise PreconditionError(
            f"nonpositive integrand at t={ts[bad[0]]} (index {bad[0]})")
    res = stats.linregress(np.log(ts), np.log(values))
    return float(res.slope), float(1.96 * res.stderr)


def geometric_times(t_lo: float, t_hi: float, points: int = 16) -> np.ndarray:
    """Log-uniform time grid for power-law fits."""
    return np.geomspace(t_lo, t_hi, points)
