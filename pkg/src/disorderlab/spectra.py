"""Interior eigenpairs and localization/delocalization diagnostics.

All finite-volume spectrum is pure point, so the "no eigenvalues above E0"
statement is operationalized: states that look localized (high IPR,
positive decay rate, negligible boundary weight, small virial residual)
should occur only at energies <= E0 plus a reported discretization margin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .errors import SolverError
from .grid import DiscreteHamiltonian, boundary_weight

__all__ = [
    "EigenPair",
    "SpectralReport",
    "VirialResult",
    "solve_window",
    "ipr",
    "virial_residual",
    "mourre_gap",
    "decay_fit",
    "ids_histogram",
    "spacing_ratio_stats",
    "build_report",
]

DENSE_ORACLE_LIMIT = 4096


@dataclass(frozen=True)
class EigenPair:
    eigenvalue: float
    eigenvector: np.ndarray
    residual: float


@dataclass(frozen=True)
class StateDiagnostics:
    eigenvalue: float
    ipr: float
    decay_rate: float
    decay_goodness: float
    boundary_weight: float
    virial_residual: float


@dataclass(frozen=True)
class SpectralReport:
    """Windowed eigenpair diagnostics plus thresholds, serializable."""

    window: tuple
    e0: float
    e1: float
    states: list          # list[StateDiagnostics]
    solver: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "window": list(self.window),
            "E0": self.e0,
            "E1": self.e1,
            "solver": self.solver,
            "states": [
                {
                    "eigenvalue": st.eigenvalue,
                    "ipr": st.ipr,
                    "decay_rate": st.decay_rate,
                    "decay_goodness": st.decay_goodness,
                    "boundary_weight": st.boundary_weight,
                    "virial_residual": st.virial_residual,
                }
                for st in self.states
            ],
        }


def _dense_eigh(H: DiscreteHamiltonian):
    return sla.eigh(H.matrix.toarray())


def solve_window(H: DiscreteHamiltonian, window, k_max: int,
                 tol_scale: float = 1e-8) -> list:
    """Eigenpairs of H inside [E_lo, E_hi], at most k_max of them.

    Small problems go through dense diagonalization; otherwise Lanczos in
    shift-invert mode at the window center, with one shift-perturbation
    retry on factorization failure.  Residuals are checked against
    tol_scale * scale(H).
    """
    e_lo, e_hi = float(window[0]), float(window[1])
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    if not (e_lo < e_hi):
        return []
    n = H.n
    if n <= DENSE_ORACLE_LIMIT or k_max >= n - 1:
        vals, vecs = _dense_eigh(H)
        sel = np.nonzero((vals > e_lo) & (vals < e_hi))[0][:k_max]
        vals, vecs = vals[sel], vecs[:, sel]
    else:
        sigma = 0.5 * (e_lo + e_hi)
        vals = vecs = None
        for attempt, shift in enumerate(
                (sigma, sigma + 1e-3 * max(1.0, abs(sigma)))):
            try:
                vals, vecs = spla.eigsh(H.matrix, k=min(k_max, n - 2),
                                        sigma=shift, which="LM")
                break
            except Exception as exc:  # factorization / convergence failure
                if attempt == 1:
                    raise SolverError(
                        f"shift-invert failed at both shifts: {exc}") from exc
        keep = (vals > e_lo) & (vals < e_hi)
        vals, vecs = vals[keep], vecs[:, keep]
    pairs = []
    tol = tol_scale * H.scale()
    for lam, v in zip(vals, vecs.T):
        v = v / np.linalg.norm(v)
        res = float(np.linalg.norm(H.apply(v) - lam * v))
        if res > tol:
            raise SolverError(
                f"eigenpair residual {res:.3e} above tolerance {tol:.3e}")
        pairs.append(EigenPair(float(lam), v, res))
    pairs.sort(key=lambda pr: pr.eigenvalue)
    return pairs


def ipr(f: np.ndarray) -> float:
    """Inverse participation ratio sum |f_i|^4 of a unit l2 vector."""
    flat = np.asarray(f).reshape(-1)
    norm = np.linalg.norm(flat)
    if norm == 0.0:
        raise ValueError("ipr of the zero vector is undefined")
    flat = flat / norm
    return float(np.sum(np.abs(flat) ** 4))


@dataclass(frozen=True)
class VirialResult:
    value: float
    boundary_weight: float
    flagged: bool         # boundary weight exceeded: value has a caveat


def virial_residual(pair: EigenPair, B_diag: np.ndarray,
                    grid=None, boundary_tol: float = 1e-6) -> VirialResult:
    """|2 lambda + <f, B f>|, the finite-volume virial surrogate.

    Small for genuine localized eigenstates, which forces
    lambda <= E0 + tolerance.  If the state leaks to the boundary the value
    is still reported, flagged.
    """
    f = pair.eigenvector.reshape(-1)
    bw = boundary_weight(grid, f) if grid is not None else 0.0
    quad = float(np.real(np.vdot(f, np.asarray(B_diag).reshape(-1) * f)))
    return VirialResult(abs(2.0 * pair.eigenvalue + quad), bw,
                        bw > boundary_tol)


def mourre_gap(pairs: list, H: DiscreteHamiltonian,
               B_diag: np.ndarray) -> float:
    """Minimum eigenvalue of M_jk = <f_j, (2H + B) f_k> on the window
    eigenbasis; theory predicts >= 2*(E1 - E0) up to discretization error."""
    if not pairs:
        raise ValueError("mourre_gap needs a nonempty eigenpair window")
    vecs = np.stack([pr.eigenvector.reshape(-1) for pr in pairs], axis=1)
    b = np.asarray(B_diag).reshape(-1)
    app = 2.0 * (H.matrix @ vecs) + b[:, None] * vecs
    mat = vecs.T.conj() @ app
    mat = 0.5 * (mat + mat.T.conj())
    return float(np.min(sla.eigvalsh(mat)))


def decay_fit(f: np.ndarray, center, grid) -> tuple:
    """Exponential-decay diagnostic: least-squares fit of log shell maxima
    of |f| against distance from ``center``.

    Returns (rate, goodness); rate > 0 indicates exponential localization.
    """
    pts = grid.points()
    flat = np.abs(np.asarray(f).reshape(-1))
    dist = np.linalg.norm(pts - np.asarray(center, dtype=float), axis=1)
    shell_width = 4.0 * grid.h
    shells = np.floor(dist / shell_width).astype(int)
    n_shells = shells.max() + 1
    maxima = np.zeros(n_shells)
    np.maximum.at(maxima, shells, flat)
    radii = (np.arange(n_shells) + 0.5) * shell_width
    floor = 1e-14 * flat.max()
    good = maxima > floor
    radii, maxima = radii[good], maxima[good]
    if len(radii) < 4:
        raise ValueError("decay fit needs at least 4 usable shells")
    y = np.log(maxima)
    slope, intercept = np.polyfit(radii, y, 1)
    fit = slope * radii + intercept
    ss_res = float(np.sum((y - fit) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    goodness = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return -float(slope), goodness


def ids_histogram(eigs: np.ndarray, bins) -> tuple:
    """Normalized eigenvalue counting density (finite-volume IDS estimate).

    Returns (bin_edges, density) with density integrating to 1.
    """
    eigs = np.asarray(eigs, dtype=float).reshape(-1)
    if eigs.size < 1:
        raise ValueError("ids_histogram needs at least one eigenvalue")
    if np.isscalar(bins) and bins == 0:
        raise ValueError("ids_histogram needs at least one bin")
    counts, edges = np.histogram(eigs, bins=bins)
    widths = np.diff(edges)
    density = counts / (eigs.size * widths)
    return edges, density


def spacing_ratio_stats(eigs: np.ndarray) -> float:
    """Mean consecutive-spacing ratio <min(s_i, s_i+1)/max(s_i, s_i+1)>.

    Approximately 2 ln 2 - 1 for Poisson spectra, larger for GOE-like."""
    eigs = np.sort(np.asarray(eigs, dtype=float).reshape(-1))
    if eigs.size < 10:
        raise ValueError("spacing ratio needs at least 10 eigenvalues")
    s = np.diff(eigs)
    r = np.minimum(s[:-1], s[1:]) / np.maximum(s[:-1], s[1:])
    return float(np.mean(r))


def build_report(H: DiscreteHamiltonian, pairs: list, B_diag: np.ndarray,
                 e0: float, e1: float, window, center=None,
                 solver: dict = None) -> SpectralReport:
    """Assemble per-state diagnostics into a serializable report."""
    grid = H.grid
    if center is None:
        center = np.zeros(grid.dimension)
    states = []
    for pr in pairs:
        vr = virial_residual(pr, B_diag, grid)
        try:
            rate, good = decay_fit(pr.eigenvector, center, grid)
        except ValueError:
            rate, good = math.nan, math.nan
        states.append(StateDiagnostics(
            eigenvalue=pr.eigenvalue,
            ipr=ipr(pr.eigenvector),
            decay_rate=rate,
            decay_goodness=good,
            boundary_weight=vr.boundary_weight,
            virial_residual=vr.value,
        ))
    return SpectralReport(window=(float(window[0]), float(window[1])),
                          e0=e0, e1=e1, states=states, solver=solver or {})
