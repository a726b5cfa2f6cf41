"""Island geometries and disorder sampling.

An island set is a finite collection of ball-supported bumps whose radii grow
like |center|**beta and whose gamma-shrunk balls are pairwise disjoint.  The
reference construction is the dyadic annulus packing in two dimensions (12
discs per annulus, covering a pi/4 fraction of the plane); a greedy lattice
packer produces generic sets in any dimension.

Disorder couplings are drawn with a counter-based generator keyed by
(seed, index) so that any subset of indices reproduces identically and the
result does not depend on iteration order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import ConfigError

__all__ = [
    "IslandSet",
    "CompactDistribution",
    "DisorderRealization",
    "Violation",
    "DensityEstimate",
    "build_example1_islands",
    "build_dyadic_islands",
    "greedy_pack_islands",
    "validate_island_set",
    "island_density",
    "sample_disorder",
    "counter_uniform",
]


# ---------------------------------------------------------------------------
# data types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IslandSet:
    """Centers and radii of an admissible island family.

    Invariants (checked by :func:`validate_island_set`):
      * the closed balls B(x, gamma*r(x)) have pairwise disjoint interiors,
      * c1*|x|**beta <= r(x) <= c2*|x|**beta for every non-origin center.
    """

    dimension: int
    centers: np.ndarray          # (n, d)
    radii: np.ndarray            # (n,)
    beta: float
    gamma: float
    c1: float
    c2: float

    def __post_init__(self):
        centers = np.atleast_2d(np.asarray(self.centers, dtype=float))
        if centers.size == 0:
            centers = centers.reshape(0, self.dimension)
        radii = np.asarray(self.radii, dtype=float).reshape(-1)
        if centers.shape != (radii.shape[0], self.dimension):
            raise ValueError("centers/radii shape mismatch")
        if np.any(radii <= 0):
            raise ValueError("island radii must be positive")
        if not (0 < self.gamma <= 1):
            raise ValueError("gamma must lie in (0, 1]")
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "radii", radii)

    def __len__(self) -> int:
        return self.radii.shape[0]

    def to_json(self) -> str:
        return json.dumps(
            {
                "d": self.dimension,
                "beta": self.beta,
                "gamma": self.gamma,
                "c1": self.c1,
                "c2": self.c2,
                "islands": [
                    {"center": list(c), "radius": r}
                    for c, r in zip(self.centers.tolist(), self.radii.tolist())
                ],
            },
            indent=1,
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "IslandSet":
        obj = json.loads(text)
        islands = obj["islands"]
        centers = np.array([it["center"] for it in islands], dtype=float)
        radii = np.array([it["radius"] for it in islands], dtype=float)
        if centers.size == 0:
            centers = centers.reshape(0, obj["d"])
        return cls(obj["d"], centers, radii, obj["beta"], obj["gamma"],
                   obj["c1"], obj["c2"])


@dataclass(frozen=True)
class CompactDistribution:
    """A compactly supported coupling law on [a, b].

    kind is one of 'uniform', 'scaled-beta' (Beta(p, q) rescaled to [a, b])
    or 'two-point' (mass 1/2 at each endpoint).
    """

    kind: str
    a: float
    b: float
    shape: tuple = ()

    def __post_init__(self):
        if self.kind not in ("uniform", "scaled-beta", "two-point"):
            raise ConfigError(f"unknown distribution kind {self.kind!r}")
        if self.a > self.b:
            raise ConfigError("distribution support needs a <= b")
        if self.kind == "scaled-beta" and len(self.shape) != 2:
            raise ConfigError("scaled-beta needs two shape parameters")
        object.__setattr__(self, "shape", tuple(float(s) for s in self.shape))

    @property
    def sup_bound(self) -> float:
        """Sup-norm bound M = max(|a|, |b|) on the couplings."""
        return max(abs(self.a), abs(self.b))

    def ppf(self, u: np.ndarray) -> np.ndarray:
        """Map uniform(0,1) variates onto the law (inverse CDF)."""
        u = np.asarray(u, dtype=float)
        if self.kind == "uniform":
            return self.a + (self.b - self.a) * u
        if self.kind == "two-point":
            return np.where(u < 0.5, self.a, self.b)
        p, q = self.shape
        return self.a + (self.b - self.a) * stats.beta.ppf(u, p, q)


@dataclass(frozen=True)
class DisorderRealization:
    """One sample omega of the i.i.d. coupling family."""

    couplings: np.ndarray
    seed: int
    distribution: CompactDistribution

    def __post_init__(self):
        object.__setattr__(
            self, "couplings", np.asarray(self.couplings, dtype=float))

    def __len__(self) -> int:
        return self.couplings.shape[0]


@dataclass(frozen=True)
class Violation:
    """One invariant violation found by :func:`validate_island_set`."""

    kind: str              # 'disjointness' or 'comparability'
    indices: tuple         # offending island index or pair
    margin: float          # measured slack (negative means violated)

    def to_json(self) -> str:
        return json.dumps(
            {"kind": self.kind, "indices": list(self.indices),
             "margin": self.margin},
            sort_keys=True,
        )


@dataclass(frozen=True)
class DensityEstimate:
    fraction: float
    std_error: float
    samples: int


# ---------------------------------------------------------------------------
# constructions
# ---------------------------------------------------------------------------

def _annulus_centers(k: int, R: float) -> np.ndarray:
    """The 12 distinct disc centers of the k-th dyadic annulus in d=2."""
    s = 2.0 ** (k - 1) * R
    pts = set()
    for sa in (-1.0, 1.0):
        for m in (-3.0, -1.0, 1.0, 3.0):
            pts.add((m * s, sa * 3.0 * s))   # centers on |x2| = 3s
            pts.add((sa * 3.0 * s, m * s))   # centers on |x1| = 3s
    return np.array(sorted(pts))


def build_example1_islands(R: float, k_max: int) -> IslandSet:
    """Dyadic annulus packing in d=2: 12 discs of radius 2**(k-1)*R per
    annulus, centers of modulus sqrt(10) or sqrt(18) times that radius.

    Corner centers shared by the two displayed center families are merged,
    so each annulus contributes exactly 12 islands.  gamma = 1 (adjacent
    discs are tangent at worst, interiors disjoint).
    """
    if R <= 0:
        raise ValueError("R must be positive")
    if k_max < 0:
        raise ValueError("k_max must be nonnegative")
    centers = []
    radii = []
    for k in range(1, k_max + 1):
        pts = _annulus_centers(k, R)
        centers.append(pts)
        radii.append(np.full(len(pts), 2.0 ** (k - 1) * R))
    if centers:
        centers = np.concatenate(centers)
        radii = np.concatenate(radii)
    else:
        centers = np.zeros((0, 2))
        radii = np.zeros(0)
    return IslandSet(
        dimension=2, centers=centers, radii=radii,
        beta=1.0, gamma=1.0,
        c1=1.0 / (3.0 * math.sqrt(2.0)), c2=1.0 / math.sqrt(10.0),
    )


def build_dyadic_islands(R: float, k_max: int) -> IslandSet:
    """One-dimensional analogue of the annulus packing: islands at
    +/- 3*2**(k-1)*R with radius 2**(k-1)*R, so r(n) = |n|/3 exactly and
    consecutive balls are tangent.
    """
    if R <= 0:
        raise ValueError("R must be positive")
    centers = []
    radii = []
    for k in range(1, k_max + 1):
        s = 2.0 ** (k - 1) * R
        centers.extend([[-3.0 * s], [3.0 * s]])
        radii.extend([s, s])
    centers = np.array(centers) if centers else np.zeros((0, 1))
    radii = np.array(radii) if radii else np.zeros(0)
    return IslandSet(dimension=1, centers=centers, radii=radii,
                     beta=1.0, gamma=1.0, c1=1.0 / 3.0, c2=1.0 / 3.0)


def greedy_pack_islands(dimension: int, half_extent: float, beta: float,
                        gamma: float, radius_scale: float,
                        lattice_step: float = 1.0,
                        min_norm: float = 1.0) -> IslandSet:
    """Generic island set: scan lattice points by increasing norm and accept
    a candidate center x with radius radius_scale*|x|**beta whenever its
    gamma-ball avoids every accepted gamma-ball.
    """
    if half_extent <= 0 or radius_scale <= 0 or lattice_step <= 0:
        raise ValueError("extent, radius scale and lattice step are positive")
    n_side = int(half_extent / lattice_step)
    axes = [np.arange(-n_side, n_side + 1) * lattice_step] * dimension
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    pts = grid.reshape(-1, dimension)
    norms = np.linalg.norm(pts, axis=1)
    keep = norms >= min_norm
    pts, norms = pts[keep], norms[keep]
    order = np.lexsort((*pts.T[::-1], norms))
    accepted = []
    acc_r = []
    for i in order:
        x = pts[i]
        r = radius_scale * norms[i] ** beta
        ok = True
        for y, ry in zip(accepted, acc_r):
            if np.linalg.norm(x - y) < gamma * (r + ry):
                ok = False
                break
        if ok:
            accepted.append(x)
            acc_r.append(r)
    centers = np.array(accepted) if accepted else np.zeros((0, dimension))
    radii = np.array(acc_r)
    return IslandSet(dimension=dimension, centers=centers, radii=radii,
                     beta=beta, gamma=gamma,
                     c1=radius_scale, c2=radius_scale)


# ---------------------------------------------------------------------------
# validation and density
# ---------------------------------------------------------------------------

def validate_island_set(s: IslandSet, rtol: float = 1e-12) -> list:
    """Check both IslandSet invariants; never raises.

    Returns an empty list iff the set is admissible.  Disjointness is the
    strict interior condition |x_i - x_j| >= gamma*(r_i + r_j) (tangent
    balls pass); comparability allows a relative slack ``rtol``.
    """
    violations = []
    n = len(s)
    for i in range(n):
        for j in range(i + 1, n):
            dist = float(np.linalg.norm(s.centers[i] - s.centers[j]))
            margin = dist - s.gamma * (s.radii[i] + s.radii[j])
            if margin < -rtol * max(1.0, dist):
                violations.append(
                    Violation("disjointness", (i, j), margin))
    norms = np.linalg.norm(s.centers, axis=1)
    for i in range(n):
        if norms[i] == 0.0:
            continue  # origin excluded from the comparability check
        lo = s.c1 * norms[i] ** s.beta
        hi = s.c2 * norms[i] ** s.beta
        if s.radii[i] < lo * (1 - rtol):
            violations.append(Violation("comparability", (i,),
                                        float(s.radii[i] - lo)))
        elif s.radii[i] > hi * (1 + rtol):
            violations.append(Violation("comparability", (i,),
                                        float(hi - s.radii[i])))
    return violations


def island_density(s: IslandSet, k: int, samples: int,
                   seed: int = 0) -> DensityEstimate:
    """Monte Carlo estimate of the disc-covered fraction of the k-th dyadic
    annulus of an Example-1 style set (d=2).

    The annulus is the square frame between half-sides 2**k*R and
    2**(k+1)*R, with R recovered from the smallest radius present.
    """
    if len(s) == 0:
        return DensityEstimate(0.0, 0.0, samples)
    if s.dimension != 2:
        raise ValueError("density estimate is defined for d=2 sets")
    R = float(np.min(s.radii))
    k_max = int(round(math.log2(float(np.max(s.radii)) / R))) + 1
    if not (1 <= k <= k_max):
        raise ValueError(f"annulus index k={k} outside 1..{k_max}")
    a = 2.0 ** k * R       # inner half-side
    b = 2.0 ** (k + 1) * R  # outer half-side
    rng = np.random.default_rng(seed)
    hits = 0
    got = 0
    centers = s.centers
    radii = s.radii
    chunk = min(samples, 1 << 19)
    while got < samples:
        m = min(chunk, samples - got)
        # rejection from the outer square: acceptance probability 3/4
        pts = rng.uniform(-b, b, size=(int(m * 1.5) + 64, 2))
        inside_frame = np.max(np.abs(pts), axis=1) >= a
        pts = pts[inside_frame][:m]
        m = len(pts)
        if m == 0:
            continue
        d2 = np.sum((pts[:, None, :] - centers[None, :, :]) ** 2, axis=-1)
        covered = np.any(d2 <= radii[None, :] ** 2, axis=1)
        hits += int(np.count_nonzero(covered))
        got += m
    frac = hits / got
    se = math.sqrt(max(frac * (1.0 - frac), 1e-300) / got)
    return DensityEstimate(frac, se, got)


# ---------------------------------------------------------------------------
# counter-based disorder sampling
# ---------------------------------------------------------------------------

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


def _mix64(x: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer (vectorized over uint64 arrays, wrapping)."""
    x = np.atleast_1d(np.asarray(x, dtype=np.uint64))
    with np.errstate(over="ignore"):
        x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


def counter_uniform(seed: int, indices: np.ndarray) -> np.ndarray:
    """Uniform(0,1) variate for each (seed, index) pair.

    Pure function of its arguments, so any subset of indices reproduces the
    same values regardless of evaluation order.
    """
    idx = np.asarray(indices, dtype=np.uint64)
    with np.errstate(over="ignore"):
        key = _mix64(np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + _GOLDEN)
        state = key + (idx + np.uint64(1)) * _GOLDEN
    return (_mix64(state) >> np.uint64(11)) * (2.0 ** -53)


def sample_disorder(dist: CompactDistribution, index_count: int,
                    seed: int = 0) -> DisorderRealization:
    """Draw one i.i.d. coupling per index, counter-based per-index."""
    if index_count < 1:
        raise ValueError("index_count must be >= 1")
    u = counter_uniform(seed, np.arange(index_count))
    return DisorderRealization(dist.ppf(u), seed, dist)
