"""Finite-volume discretization of H = -Laplacian + V and of the dilation
generator A = -i (x . grad + d/2).

Grids are origin-centered so the box respects dilation symmetry.  The
kinetic term is the second-order central stencil (sparse, exactly
symmetric); Dirichlet eliminates the boundary nodes, periodic wraps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import PreconditionError, ResourceError
from .potential import IslandPotential, eval_potential

__all__ = [
    "GridSpec",
    "DiscreteHamiltonian",
    "assemble_hamiltonian",
    "apply_dilation_generator",
    "boundary_weight",
    "commutator_residual",
]

DEFAULT_MEMORY_BUDGET = 1 << 23   # max unknowns N^d


@dataclass(frozen=True)
class GridSpec:
    """Origin-centered uniform grid on [-L, L]^d with N points per axis."""

    dimension: int
    half_length: float
    points_per_axis: int
    boundary: str = "dirichlet"
    memory_budget: int = DEFAULT_MEMORY_BUDGET

    def __post_init__(self):
        if self.half_length <= 0:
            raise ValueError("half_length must be positive")
        if self.points_per_axis <= 0 or self.points_per_axis % 2:
            raise ValueError("points_per_axis must be a positive even integer")
        if self.boundary not in ("dirichlet", "periodic"):
            raise ValueError("boundary must be 'dirichlet' or 'periodic'")
        if self.unknowns_total > self.memory_budget:
            raise ResourceError(
                f"N^d = {self.unknowns_total} exceeds the memory budget "
                f"{self.memory_budget}")

    @property
    def h(self) -> float:
        return 2.0 * self.half_length / self.points_per_axis

    @property
    def unknowns_per_axis(self) -> int:
        # Dirichlet drops the two boundary nodes of the N+1 node line
        if self.boundary == "dirichlet":
            return self.points_per_axis - 1
        return self.points_per_axis

    @property
    def unknowns_total(self) -> int:
        return self.unknowns_per_axis ** self.dimension

    @property
    def shape(self) -> tuple:
        return (self.unknowns_per_axis,) * self.dimension

    def axis_coords(self) -> np.ndarray:
        """Coordinates of the unknowns along one axis."""
        if self.boundary == "dirichlet":
            i = np.arange(1, self.points_per_axis)
        else:
            i = np.arange(self.points_per_axis)
        return -self.half_length + i * self.h

    def points(self) -> np.ndarray:
        """All unknown coordinates, shape (unknowns_total, d)."""
        axes = [self.axis_coords()] * self.dimension
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack(mesh, axis=-1).reshape(-1, self.dimension)

    def fourier_freqs(self) -> list:
        """Continuum wavenumbers xi_k per axis (periodic grids)."""
        if self.boundary != "periodic":
            raise ValueError("Fourier frequencies require a periodic grid")
        return [2.0 * np.pi
                * np.fft.fftfreq(self.points_per_axis, d=self.h)] * \
            self.dimension


def _laplacian_1d(grid: GridSpec) -> sp.csr_matrix:
    n = grid.unknowns_per_axis
    h2 = grid.h ** 2
    main = np.full(n, 2.0 / h2)
    off = np.full(n - 1, -1.0 / h2)
    mat = sp.diags([off, main, off], [-1, 0, 1], format="lil")
    if grid.boundary == "periodic":
        mat[0, n - 1] = -1.0 / h2
        mat[n - 1, 0] = -1.0 / h2
    return mat.tocsr()


@dataclass(frozen=True)
class DiscreteHamiltonian:
    """Sparse symmetric -Laplacian + diag(V) on a GridSpec."""

    grid: GridSpec
    potential_diag: np.ndarray
    matrix: sp.csr_matrix = field(repr=False)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def apply(self, f: np.ndarray) -> np.ndarray:
        """Matrix-free style apply; accepts grid-shaped or flat arrays."""
        flat = np.asarray(f).reshape(-1)
        return (self.matrix @ flat).reshape(np.asarray(f).shape)

    def scale(self) -> float:
        """Magnitude scale: stencil maximum plus potential sup."""
        h2 = self.grid.h ** 2
        return 4.0 * self.grid.dimension / h2 + float(
            np.max(np.abs(self.potential_diag), initial=0.0))


def assemble_hamiltonian(grid: GridSpec, potential) -> DiscreteHamiltonian:
    """Assemble -Laplacian + V.

    ``potential`` may be an IslandPotential, a callable on (m, d) point
    arrays, an array of diagonal values matching the grid, or None/0.
    """
    lap1 = _laplacian_1d(grid)
    n = grid.unknowns_per_axis
    eye = sp.identity(n, format="csr")
    kin = lap1
    for _ in range(grid.dimension - 1):
        kin = sp.kron(kin, eye, format="csr") + sp.kron(
            sp.identity(kin.shape[0], format="csr"), lap1, format="csr")
    pts = grid.points()
    if potential is None:
        diag = np.zeros(len(pts))
    elif isinstance(potential, IslandPotential):
        diag = eval_potential(potential, pts)
    elif callable(potential):
        diag = np.asarray(potential(pts), dtype=float).reshape(-1)
    else:
        diag = np.asarray(potential, dtype=float).reshape(-1)
    if diag.shape[0] != grid.unknowns_total:
        raise ValueError("potential diagonal does not match the grid")
    mat = (kin + sp.diags(diag)).tocsr()
    return DiscreteHamiltonian(grid=grid, potential_diag=diag, matrix=mat)


# ---------------------------------------------------------------------------
# dilation generator
# ---------------------------------------------------------------------------

def _central_diff(f: np.ndarray, axis: int, h: float,
                  periodic: bool) -> np.ndarray:
    if periodic:
        return (np.roll(f, -1, axis=axis) - np.roll(f, 1, axis=axis)) / (2 * h)
    out = np.zeros_like(f, dtype=np.result_type(f, 1.0j))
    fwd = [slice(None)] * f.ndim
    bwd = [slice(None)] * f.ndim
    mid = [slice(None)] * f.ndim
    fwd[axis] = slice(2, None)
    bwd[axis] = slice(0, -2)
    mid[axis] = slice(1, -1)
    out[tuple(mid)] = (f[tuple(fwd)] - f[tuple(bwd)]) / (2 * h)
    # one-sided values at the ends, consistent with zero exterior values
    first = [slice(None)] * f.ndim
    last = [slice(None)] * f.ndim
    first[axis] = 0
    last[axis] = -1
    nxt = [slice(None)] * f.ndim
    prv = [slice(None)] * f.ndim
    nxt[axis] = 1
    prv[axis] = -2
    out[tuple(first)] = f[tuple(nxt)] / (2 * h)
    out[tuple(last)] = -f[tuple(prv)] / (2 * h)
    return out


def apply_dilation_generator(grid: GridSpec, f: np.ndarray) -> np.ndarray:
    """A f = -(i/2) (x . grad f + div(x f)) with central differences.

    Symmetrized, so the bilinear form is antisymmetric up to boundary
    leakage.  Returns a complex array of the same shape as ``f``.
    """
    shape = grid.shape
    arr = np.asarray(f).reshape(shape).astype(complex)
    periodic = grid.boundary == "periodic"
    x1 = grid.axis_coords()
    total = np.zeros_like(arr)
    for axis in range(grid.dimension):
        xshape = [1] * grid.dimension
        xshape[axis] = len(x1)
        x = x1.reshape(xshape)
        total += x * _central_diff(arr, axis, grid.h, periodic)
        total += _central_diff(x * arr, axis, grid.h, periodic)
    out = -0.5j * total
    return out.reshape(np.asarray(f).shape)


def boundary_weight(grid: GridSpec, f: np.ndarray,
                    layer_cells: int = None) -> float:
    """Fraction of the l2 mass within ``layer_cells`` of the box edge."""
    shape = grid.shape
    arr = np.abs(np.asarray(f).reshape(shape)) ** 2
    total = float(np.sum(arr))
    if total == 0.0:
        return 0.0
    if layer_cells is None:
        layer_cells = max(2, grid.unknowns_per_axis // 64)
    interior = arr
    for axis in range(grid.dimension):
        sl = [slice(None)] * grid.dimension
        sl[axis] = slice(layer_cells, -layer_cells)
        interior = interior[tuple(sl)]
    return 1.0 - float(np.sum(interior)) / total


def commutator_residual(H: DiscreteHamiltonian, p, f: np.ndarray,
                        boundary_tol: float = 1e-8) -> float:
    """|| i(HA - AH) f - (2H + B) f || / ||f|| with B = b1 - 2V.

    ``p`` supplies the commutator field: an IslandPotential, or None for
    V = 0.  Expected O(h^2) for smooth f supported well inside the box.
    """
    grid = H.grid
    bw = boundary_weight(grid, f)
    if bw > boundary_tol:
        raise PreconditionError(
            f"test function boundary weight {bw:.3e} exceeds {boundary_tol}")
    flat = np.asarray(f).reshape(-1).astype(complex)
    Af = apply_dilation_generator(grid, flat)
    comm = 1.0j * (H.apply(Af) - apply_dilation_generator(grid, H.apply(flat)))
    if p is None:
        b_diag = -2.0 * H.potential_diag
    else:
        from .potential import eval_commutator_field
        pts = grid.points()
        b_diag = eval_commutator_field(p, pts) - 2.0 * eval_potential(p, pts)
    target = 2.0 * H.apply(flat) + b_diag * flat
    return float(np.linalg.norm(comm - target) / np.linalg.norm(flat))
