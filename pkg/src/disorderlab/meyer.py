"""Lemarie-Meyer wavelets in the Fourier domain and the projection
potential built on them.

The scaling profile is 1 on |xi| <= 2pi/3, cos(pi/2 * nu(3|xi|/(2pi) - 1))
on the transition band and 0 beyond 4pi/3, with nu the C-infinity
normalized mollifier-integral ramp (nu(t) + nu(1-t) = 1).  The wavelet
profile is e^{i xi/2} sqrt(|phihat(xi/2)|^2 - |phihat(xi)|^2), supported in
2pi/3 <= |xi| <= 8pi/3.

Every inner product is computed in the Fourier domain over the compact
supports with Gauss-Legendre panels, doubled until successive values agree;
nothing here touches a spatial grid except the projection-potential
applier.  Because the multivariate functions, the free propagator and the
band-limited test functions are all axis-products, every d-dimensional
integral factorizes into one-dimensional ones.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .evolution import BandLimitedTestFunction, fourier_from_grid, \
    grid_from_fourier
from .geometry import DisorderRealization

__all__ = [
    "MeyerPair",
    "WaveletIndex",
    "WaveletFamily",
    "CookResult",
    "smooth_ramp",
    "meyer_scaling_hat",
    "meyer_wavelet_hat",
    "psi_c_hat",
    "phi_n_hat",
    "axis_support",
    "admissible_scales",
    "overlap",
    "gram_matrix",
    "cook_sum",
    "apply_projection_potential",
]

TWO_THIRDS_PI = 2.0 * math.pi / 3.0
FOUR_THIRDS_PI = 4.0 * math.pi / 3.0
EIGHT_THIRDS_PI = 8.0 * math.pi / 3.0


# ---------------------------------------------------------------------------
# the C-infinity ramp and the profile pair
# ---------------------------------------------------------------------------

@lru_cache(maxsize=8)
def _gl_nodes(n: int):
    return np.polynomial.legendre.leggauss(n)


def _ramp_integrand(s: np.ndarray) -> np.ndarray:
    out = np.zeros_like(s)
    inside = (s > 0.0) & (s < 1.0)
    si = s[inside]
    out[inside] = np.exp(-1.0 / (si * (1.0 - si)))
    return out


@lru_cache(maxsize=1)
def _ramp_total() -> float:
    x, w = _gl_nodes(200)
    return float(np.sum(w * _ramp_integrand(0.5 * (x + 1.0))) * 0.5)


def smooth_ramp(t: np.ndarray, nodes: int = 128) -> np.ndarray:
    """nu(t): 0 for t <= 0, 1 for t >= 1, C-infinity in between with
    nu(t) + nu(1 - t) = 1 (normalized mollifier integral)."""
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    out = np.clip(t, 0.0, 1.0).copy()
    mid = (t > 0.0) & (t < 1.0)
    if np.any(mid):
        tm = t[mid]
        x, w = _gl_nodes(nodes)
        # map GL nodes onto [0, t] for each t
        pts = 0.5 * tm[:, None] * (x[None, :] + 1.0)
        vals = _ramp_integrand(pts)
        out[mid] = (0.5 * tm * np.sum(w[None, :] * vals, axis=1)
                    / _ramp_total())
    return float(out[0]) if scalar else out


def meyer_scaling_hat(xi: np.ndarray) -> np.ndarray:
    """Fourier transform of the Meyer scaling function (real, even)."""
    xi = np.asarray(xi, dtype=float)
    scalar = xi.ndim == 0
    a = np.abs(np.atleast_1d(xi))
    out = np.zeros_like(a)
    out[a <= TWO_THIRDS_PI] = 1.0
    band = (a > TWO_THIRDS_PI) & (a < FOUR_THIRDS_PI)
    if np.any(band):
        out[band] = np.cos(0.5 * np.pi
                           * smooth_ramp(3.0 * a[band] / (2.0 * np.pi) - 1.0))
    return float(out[0]) if scalar else out


def meyer_wavelet_hat(xi: np.ndarray) -> np.ndarray:
    """Fourier transform of the Meyer wavelet: half-shift phase times the
    square root of |phihat(xi/2)|^2 - |phihat(xi)|^2; support
    2pi/3 <= |xi| <= 8pi/3."""
    xi = np.asarray(xi, dtype=float)
    scalar = xi.ndim == 0
    x = np.atleast_1d(xi)
    lo = meyer_scaling_hat(0.5 * x)
    hi = meyer_scaling_hat(x)
    mag = np.sqrt(np.maximum(lo * lo - hi * hi, 0.0))
    out = np.exp(0.5j * x) * mag
    return complex(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# indices and the tensor family
# ---------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class WaveletIndex:
    """(c, n1, n2) with c in F = {0,1}^d \\ {0}, scale n1, translation n2."""

    c: tuple
    n1: int
    n2: tuple

    def __post_init__(self):
        if not any(self.c):
            raise ValueError("c = 0 is not a valid wavelet index")
        if len(self.c) != len(self.n2):
            raise ValueError("c and n2 must have the same dimension")

    @property
    def dimension(self) -> int:
        return len(self.c)


def psi_c_hat(c, xi: np.ndarray) -> np.ndarray:
    """Transform of the tensor factor Psi_c: product over axes of phihat
    (c_j = 0) or psihat (c_j = 1); c != 0 guarantees a wavelet factor."""
    if not any(c):
        raise ValueError("c = 0 is not a valid tensor index")
    xi = np.asarray(xi, dtype=float)
    if xi.ndim == 1 and len(c) == 1:
        xi = xi[:, None]
    out = np.ones(xi.shape[:-1], dtype=complex)
    for j, cj in enumerate(c):
        fac = meyer_wavelet_hat(xi[..., j]) if cj else \
            meyer_scaling_hat(xi[..., j])
        out = out * fac
    return out


def phi_n_hat(idx: WaveletIndex, xi: np.ndarray) -> np.ndarray:
    """Transform of the dilated-translated family member:
    2^{-d n1/2} Psihat_c(2^{-n1} xi) e^{-i 2^{-n1} n2 . xi}."""
    xi = np.asarray(xi, dtype=float)
    if xi.ndim == 1 and idx.dimension == 1:
        xi = xi[:, None]
    s = 2.0 ** (-idx.n1)
    phase = np.exp(-1j * s * (xi @ np.asarray(idx.n2, dtype=float)))
    return 2.0 ** (-idx.dimension * idx.n1 / 2.0) * \
        psi_c_hat(idx.c, s * xi) * phase


def axis_support(cj: int, n1: int) -> list:
    """Support intervals of the axis factor of Phihat at scale n1."""
    s = 2.0 ** n1
    if cj:
        return [(-s * EIGHT_THIRDS_PI, -s * TWO_THIRDS_PI),
                (s * TWO_THIRDS_PI, s * EIGHT_THIRDS_PI)]
    return [(-s * FOUR_THIRDS_PI, s * FOUR_THIRDS_PI)]


def _intersect(intervals: list, lo: float, hi: float) -> list:
    out = []
    for a, b in intervals:
        a2, b2 = max(a, lo), min(b, hi)
        if b2 > a2:
            out.append((a2, b2))
    return out


def admissible_scales(c, f: BandLimitedTestFunction,
                      n1_cap: int = 64) -> list:
    """Scales n1 with every axis band of Phihat meeting supp fhat.

    The wavelet factor forced by c != 0 makes this window finite (the
    band-selection rule); outside it the overlap is exactly zero.
    """
    scales = []
    for n1 in range(-n1_cap, n1_cap + 1):
        ok = True
        for j, cj in enumerate(c):
            lo, hi = f.support_interval(j)
            if not _intersect(axis_support(cj, n1), lo, hi):
                ok = False
                break
        if ok:
            scales.append(n1)
    return scales


# ---------------------------------------------------------------------------
# adaptive Gauss-Legendre quadrature on interval unions
# ---------------------------------------------------------------------------

def _integrate_intervals(fn, intervals: list, osc: float = 0.0,
                         rtol: float = 1e-9, nodes: int = 32,
                         max_doublings: int = 9) -> complex:
    """Integrate fn over a union of intervals; panel count starts from the
    oscillation scale ``osc`` (total phase variation in radians) and doubles
    until two successive evaluations agree to ``rtol``."""
    total_len = sum(b - a for a, b in intervals)
    if total_len <= 0.0:
        return 0.0 + 0.0j
    x, w = _gl_nodes(nodes)
    panels = max(2, int(osc / (4.0 * nodes)) + 1)
    prev = None
    for _ in range(max_doublings):
        acc = 0.0 + 0.0j
        for a, b in intervals:
            k = max(1, int(round(panels * (b - a) / total_len)))
            edges = np.linspace(a, b, k + 1)
            half = 0.5 * (edges[1] - edges[0])
            mids = 0.5 * (edges[:-1] + edges[1:])
            pts = (mids[:, None] + half * x[None, :]).ravel()
            wts = np.broadcast_to(half * w, (k, nodes)).ravel()
            acc += complex(np.sum(fn(pts) * wts))
        if prev is not None and abs(acc - prev) <= rtol * max(1.0, abs(acc)):
            return acc
        prev = acc
        panels *= 2
    return prev


def _axis_factor(cj: int, n1: int):
    s = 2.0 ** (-n1)
    if cj:
        return lambda xi: meyer_wavelet_hat(s * xi)
    return lambda xi: meyer_scaling_hat(s * xi) + 0.0j


def wavelet_inner(a: WaveletIndex, b: WaveletIndex,
                  rtol: float = 1e-10) -> complex:
    """<Phi_a, Phi_b> by per-axis Fourier quadrature (exactly delta_ab for
    the true Meyer family; quadrature-limited here)."""
    d = a.dimension
    sa, sb = 2.0 ** (-a.n1), 2.0 ** (-b.n1)
    pref = 2.0 ** (-d * (a.n1 + b.n1) / 2.0) / (2.0 * math.pi) ** d
    out = pref
    for j in range(d):
        sup = []
        for lo, hi in axis_support(a.c[j], a.n1):
            sup.extend(_intersect(axis_support(b.c[j], b.n1), lo, hi))
        if not sup:
            return 0.0 + 0.0j
        fa = _axis_factor(a.c[j], a.n1)
        fb = _axis_factor(b.c[j], b.n1)
        shift = sa * a.n2[j] - sb * b.n2[j]
        span = sum(hi - lo for lo, hi in sup)
        osc = abs(shift) * span + span  # translation phase + half-shift

        def integrand(xi, fa=fa, fb=fb, shift=shift):
            return np.conj(fa(xi)) * fb(xi) * np.exp(1j * shift * xi)

        out *= _integrate_intervals(integrand, sup, osc=osc, rtol=rtol)
        if out == 0.0:
            return 0.0 + 0.0j
    return out


def gram_matrix(indices: list, rtol: float = 1e-10) -> np.ndarray:
    """Gram matrix of a finite index family (identity up to quadrature)."""
    n = len(indices)
    out = np.zeros((n, n), dtype=complex)
    for i in range(n):
        out[i, i] = wavelet_inner(indices[i], indices[i], rtol)
        for j in range(i + 1, n):
            val = wavelet_inner(indices[i], indices[j], rtol)
            out[i, j] = val
            out[j, i] = np.conj(val)
    return out


# ---------------------------------------------------------------------------
# overlaps with freely evolved test functions
# ---------------------------------------------------------------------------

def _overlap_axis(cj: int, n1: int, f: BandLimitedTestFunction, j: int,
                  t: float, n2_values: np.ndarray,
                  rtol: float = 1e-9, nodes: int = 32,
                  max_doublings: int = 9) -> np.ndarray:
    """The axis-j integrals of <Phi_n, e^{i Laplacian t} f> for a whole
    vector of translations n2_j at once:

        I(m) = int conj(g_c(2^{-n1} xi)) e^{i 2^{-n1} m xi}
               e^{-i xi^2 t} fhat_j(xi) dxi
    """
    lo, hi = f.support_interval(j)
    sup = _intersect(axis_support(cj, n1), lo, hi)
    m = np.asarray(n2_values, dtype=float)
    if not sup:
        return np.zeros(m.shape, dtype=complex)
    fac = _axis_factor(cj, n1)
    s = 2.0 ** (-n1)
    span = sum(b - a for a, b in sup)
    ximax = max(abs(lo), abs(hi))
    osc = (2.0 * ximax * abs(t) + s * float(np.max(np.abs(m), initial=0.0))
           + 1.0) * span
    x, w = _gl_nodes(nodes)
    total_len = span
    panels = max(2, int(osc / (4.0 * nodes)) + 1)
    prev = None
    for _ in range(max_doublings):
        acc = np.zeros(m.shape, dtype=complex)
        for a, b in sup:
            k = max(1, int(round(panels * (b - a) / total_len)))
            edges = np.linspace(a, b, k + 1)
            half = 0.5 * (edges[1] - edges[0])
            mids = 0.5 * (edges[:-1] + edges[1:])
            pts = (mids[:, None] + half * x[None, :]).ravel()
            wts = np.broadcast_to(half * w, (k, nodes)).ravel()
            base = (np.conj(fac(pts)) * np.exp(-1j * pts ** 2 * t)
                    * f.fhat_axis(j, pts) * wts)
            acc += np.exp(1j * s * np.outer(m, pts)) @ base
        if prev is not None:
            err = float(np.max(np.abs(acc - prev)))
            if err <= rtol * max(1.0, float(np.max(np.abs(acc)))):
                return acc
        prev = acc
        panels *= 2
    return prev


def overlap(idx: WaveletIndex, f: BandLimitedTestFunction, t: float,
            rtol: float = 1e-9) -> complex:
    """<Phi_n, e^{i Laplacian t} f> by Fourier quadrature over supp fhat.

    Returns exact zero without quadrature when any axis band misses the
    support (the n1 selection rule)."""
    d = idx.dimension
    pref = 2.0 ** (-d * idx.n1 / 2.0) / (2.0 * math.pi) ** d
    out = complex(pref)
    for j in range(d):
        val = _overlap_axis(idx.c[j], idx.n1, f, j, t,
                            np.array([idx.n2[j]]), rtol=rtol)[0]
        if val == 0.0:
            return 0.0 + 0.0j
        out *= val
    return out


# ---------------------------------------------------------------------------
# the truncated projection potential and its Cook sum
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MeyerPair:
    """Marker for the profile pair used by a family (the toolkit ships the
    single mollifier-ramp pair, so this mostly carries tolerances)."""

    ramp_nodes: int = 128
    quad_rtol: float = 1e-9


@dataclass(frozen=True)
class WaveletFamily:
    """Truncated index family: the designated coordinate of n2 is bounded
    by ``K`` (the proof-side reading of the Lambda constraint), remaining
    coordinates run over |m| <= n2_max, and scales over |n1| <= scale_cap
    intersected with the selection-rule window of the test function."""

    dimension: int
    K: int = 2
    n2_max: int = 64
    scale_cap: int = 8
    designated: int = 0
    pair: MeyerPair = MeyerPair()

    def n2_range(self, axis: int) -> np.ndarray:
        bound = self.K if axis == self.designated else self.n2_max
        return np.arange(-bound, bound + 1)

    def tensor_signs(self) -> list:
        return [c for c in itertools.product((0, 1), repeat=self.dimension)
                if any(c)]

    def indices(self, f: BandLimitedTestFunction = None,
                n1_values=None) -> list:
        """Deterministic (sorted) enumeration of the truncated family."""
        out = []
        for c in self.tensor_signs():
            if n1_values is not None:
                scales = list(n1_values)
            elif f is not None:
                scales = [n1 for n1 in admissible_scales(c, f)
                          if abs(n1) <= self.scale_cap]
            else:
                scales = list(range(-self.scale_cap, self.scale_cap + 1))
            for n1 in scales:
                ranges = [self.n2_range(axis)
                          for axis in range(self.dimension)]
                for n2 in itertools.product(*(r.tolist() for r in ranges)):
                    out.append(WaveletIndex(c, n1, tuple(n2)))
        out.sort()
        return out


@dataclass(frozen=True)
class CookResult:
    """Truncated Cook sum sum |omega| |<Phi, e^{i Laplacian t} f>| with the
    tail bound extrapolated from the fitted 1/(1+m^2) envelope."""

    value: float          # sum of |omega| * |overlap| over the truncation
    norm: float           # sqrt(sum omega^2 |overlap|^2) = ||V e^{iDt} f||
    tail_bound: float
    flagged: bool         # tail bound exceeds 10% of the partial sum
    terms: int


def _axis_tail_constant(values: np.ndarray, ms: np.ndarray) -> float:
    """Envelope constant C with |A(m)| <= C / (1 + m^2) on the computed
    range, used to extrapolate the sum beyond it."""
    return float(np.max(np.abs(values) * (1.0 + ms.astype(float) ** 2)))


def cook_sum(family: WaveletFamily, omega: DisorderRealization,
             f: BandLimitedTestFunction, t: float) -> CookResult:
    """Evaluate the truncated sum over I_Lambda dominating
    ||V^omega e^{i Laplacian t} f|| for the projection potential.

    Couplings bind to the family's sorted index enumeration.  Per (c, n1)
    block the overlap factorizes per axis, so each block costs d
    one-dimensional quadratures swept over the translation ranges.
    """
    indices = family.indices(f)
    if len(omega) != len(indices):
        raise ValueError(
            f"{len(indices)} couplings required, got {len(omega)}")
    coup = {idx: omega.couplings[i] for i, idx in enumerate(indices)}
    m_bound = float(np.max(np.abs(omega.couplings), initial=0.0))
    rtol = family.pair.quad_rtol
    value = 0.0
    norm_sq = 0.0
    tail = 0.0
    terms = 0
    blocks = sorted({(idx.c, idx.n1) for idx in indices})
    for c, n1 in blocks:
        pref = 2.0 ** (-family.dimension * n1 / 2.0) \
            / (2.0 * math.pi) ** family.dimension
        axis_tables = []
        axis_ranges = []
        for j in range(family.dimension):
            ms = family.n2_range(j)
            axis_tables.append(_overlap_axis(c[j], n1, f, j, t, ms,
                                             rtol=rtol))
            axis_ranges.append(ms)
        if any(np.all(tab == 0.0) for tab in axis_tables):
            continue
        # per-index overlaps: product of axis factors
        abs_ov = pref
        for tab in axis_tables:
            abs_ov = np.multiply.outer(abs_ov, np.abs(tab))
        for pos in itertools.product(
                *(range(len(r)) for r in axis_ranges)):
            n2 = tuple(int(axis_ranges[j][pos[j]])
                       for j in range(family.dimension))
            om = coup[WaveletIndex(c, n1, n2)]
            ov = abs_ov[pos]
            value += abs(om) * ov
            norm_sq += om * om * ov * ov
            terms += 1
        # tail beyond the n2 truncation on unbounded axes, from the
        # 1/(1+m^2) envelope per axis and the product structure
        sums_in = [float(np.sum(np.abs(tab))) for tab in axis_tables]
        sums_full = list(sums_in)
        for j in range(family.dimension):
            if j == family.designated:
                continue
            bound = family.n2_max
            C = _axis_tail_constant(axis_tables[j], axis_ranges[j])
            sums_full[j] += 2.0 * C * (math.pi / 2.0 - math.atan(bound))
        tail += m_bound * pref * (np.prod(sums_full) - np.prod(sums_in))
    flagged = tail > 0.1 * value if value > 0.0 else False
    return CookResult(value=value, norm=math.sqrt(norm_sq),
                      tail_bound=tail, flagged=flagged, terms=terms)


# ---------------------------------------------------------------------------
# grid-side projection potential
# ---------------------------------------------------------------------------

def _phi_hat_on_grid(idx: WaveletIndex, grid) -> np.ndarray:
    freqs = [2.0 * np.pi * np.fft.fftfreq(grid.points_per_axis, d=grid.h)
             for _ in range(grid.dimension)]
    s = 2.0 ** (-idx.n1)
    arr = np.ones((1,) * grid.dimension, dtype=complex)
    for j in range(grid.dimension):
        fac = _axis_factor(idx.c[j], idx.n1)(freqs[j]) \
            * np.exp(-1j * s * idx.n2[j] * freqs[j])
        sh = [1] * grid.dimension
        sh[j] = -1
        arr = arr * fac.reshape(sh)
    return 2.0 ** (-grid.dimension * idx.n1 / 2.0) * \
        np.broadcast_to(arr, grid.shape).copy()


def apply_projection_potential(family_or_indices, omega, g: np.ndarray,
                               grid) -> np.ndarray:
    """(sum_n omega_n |Phi_n><Phi_n|) g on a periodic grid via the Fourier
    representation of each family member."""
    if isinstance(family_or_indices, WaveletFamily):
        indices = family_or_indices.indices()
    else:
        indices = list(family_or_indices)
    coup = omega.couplings if isinstance(omega, DisorderRealization) \
        else np.asarray(omega, dtype=float)
    if len(coup) != len(indices):
        raise ValueError("one coupling per index required")
    ghat = fourier_from_grid(grid, g)
    dxi = (np.pi / grid.half_length) ** grid.dimension
    out_hat = np.zeros(grid.shape, dtype=complex)
    for idx, om in zip(indices, coup):
        if om == 0.0:
            continue
        ph = _phi_hat_on_grid(idx, grid)
        cn = np.sum(np.conj(ph) * ghat) * dxi / (2.0 * np.pi) ** \
            grid.dimension
        out_hat += om * cn * ph
    return grid_from_fourier(grid, out_hat)
