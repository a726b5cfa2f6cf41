import json
import math

import numpy as np
import pytest

from disorderlab import geometry as geo


def test_example1_counts_and_radii():
    s = geo.build_example1_islands(1.0, 4)
    assert s.dimension == 2
    assert len(s) == 4 * 12
    for k in range(1, 5):
        scale = 2.0 ** (k - 1)
        block = slice(12 * (k - 1), 12 * k)
        assert np.allclose(s.radii[block], scale)
        moduli = np.linalg.norm(s.centers[block], axis=1)
        expected = {math.sqrt(10.0) * scale, math.sqrt(18.0) * scale}
        for m in moduli:
            assert min(abs(m - e) for e in expected) < 1e-12


def test_example1_modulus_multiplicities():
    # eight discs on the inner ring (axis-adjacent), four on the corners
    s = geo.build_example1_islands(2.5, 1)
    moduli = np.linalg.norm(s.centers, axis=1)
    inner = np.isclose(moduli, math.sqrt(10.0) * 2.5)
    outer = np.isclose(moduli, math.sqrt(18.0) * 2.5)
    assert inner.sum() == 8
    assert outer.sum() == 4
    assert (inner | outer).all()


def test_example1_scaling_in_R():
    a = geo.build_example1_islands(1.0, 3)
    b = geo.build_example1_islands(3.0, 3)
    assert np.allclose(b.centers, 3.0 * a.centers)
    assert np.allclose(b.radii, 3.0 * a.radii)


def test_example1_disjoint_through_k6():
    s = geo.build_example1_islands(1.0, 6)
    assert geo.validate_island_set(s) == []


def test_validator_flags_true_overlap():
    s = geo.IslandSet(
        dimension=2,
        centers=np.array([[2.0, 0.0], [3.0, 0.0]]),
        radii=np.array([1.0, 1.5]),
        beta=1.0, gamma=1.0, c1=0.5, c2=0.5)
    overlaps = [v for v in geo.validate_island_set(s)
                if v.kind == "disjointness"]
    assert len(overlaps) == 1
    assert overlaps[0].indices == (0, 1)
    rec = json.loads(overlaps[0].to_json())
    assert rec["margin"] == pytest.approx(1.0 - 2.5)


def test_validator_flags_radius_law_breach():
    # radius far below c1*|center| breaks the comparability invariant
    s = geo.IslandSet(
        dimension=2,
        centers=np.array([[8.0, 0.0]]),
        radii=np.array([0.1]),
        beta=1.0, gamma=1.0, c1=0.5, c2=0.5)
    kinds = {v.kind for v in geo.validate_island_set(s)}
    assert kinds == {"comparability"}


def test_validator_accepts_tangency():
    # balls touching at a point have disjoint interiors
    s = geo.IslandSet(
        dimension=2,
        centers=np.array([[2.0, 0.0], [4.0, 0.0]]),
        radii=np.array([1.0, 1.0]),
        beta=1.0, gamma=1.0, c1=0.25, c2=0.5)
    assert [v for v in geo.validate_island_set(s)
            if v.kind == "disjointness"] == []


def test_dyadic_islands_1d():
    s = geo.build_dyadic_islands(1.0, 5)
    assert s.dimension == 1
    assert len(s) == 10
    for k in range(1, 6):
        scale = 2.0 ** (k - 1)
        sel = np.isclose(s.radii, scale)
        assert sel.sum() == 2
        assert sorted(s.centers[sel, 0]) == pytest.approx(
            [-3.0 * scale, 3.0 * scale])
    assert geo.validate_island_set(s) == []


def test_island_set_json_roundtrip():
    s = geo.build_example1_islands(1.5, 2)
    t = geo.IslandSet.from_json(s.to_json())
    assert t.dimension == s.dimension
    assert np.array_equal(t.centers, s.centers)
    assert np.array_equal(t.radii, s.radii)
    assert t.gamma == s.gamma and t.beta == s.beta


def test_greedy_pack_respects_radius_law():
    s = geo.greedy_pack_islands(2, 20.0, 1.0, 1.0, 0.2)
    assert len(s) > 0
    assert geo.validate_island_set(s) == []
    moduli = np.linalg.norm(s.centers, axis=1)
    assert np.allclose(s.radii, 0.2 * moduli)


def test_counter_uniform_deterministic_and_order_free():
    idx = np.arange(100, dtype=np.uint64)
    u = geo.counter_uniform(7, idx)
    v = geo.counter_uniform(7, idx[::-1])[::-1]
    assert np.array_equal(u, v)
    w = geo.counter_uniform(7, idx[10:20])
    assert np.array_equal(w, u[10:20])
    assert not np.array_equal(u, geo.counter_uniform(8, idx))
    assert (u >= 0).all() and (u < 1).all()


def test_counter_uniform_is_roughly_uniform():
    u = geo.counter_uniform(123, np.arange(200000))
    assert abs(u.mean() - 0.5) < 0.005
    assert abs(u.var() - 1.0 / 12.0) < 0.002


def test_distribution_uniform_ppf():
    d = geo.CompactDistribution("uniform", -2.0, 3.0)
    assert d.ppf(np.array([0.0]))[0] == pytest.approx(-2.0)
    assert d.ppf(np.array([1.0]))[0] == pytest.approx(3.0)
    assert d.sup_bound == 3.0


def test_distribution_two_point():
    d = geo.CompactDistribution("two-point", -1.0, 2.0)
    vals = d.ppf(np.linspace(0.0, 0.999, 100))
    assert set(np.unique(vals)) <= {-1.0, 2.0}
    assert d.sup_bound == 2.0


def test_sample_disorder_subset_reproducible():
    d = geo.CompactDistribution("uniform", -1.0, 1.0)
    big = geo.sample_disorder(d, 50, seed=42)
    small = geo.sample_disorder(d, 20, seed=42)
    assert np.array_equal(big.couplings[:20], small.couplings)
    assert (np.abs(big.couplings) <= 1.0).all()


def test_island_density_quarter_pi():
    s = geo.build_example1_islands(1.0, 3)
    est = geo.island_density(s, 2, 100000, seed=5)
    assert abs(est.fraction - math.pi / 4.0) < 3.5 * est.std_error
    assert est.std_error < 0.01
