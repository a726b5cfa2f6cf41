import numpy as np
import pytest

from disorderlab import evolution as evo
from disorderlab.errors import PreconditionError
from disorderlab.grid import GridSpec


def _grid(d=1, L=40.0, N=512):
    return GridSpec(d, L, N, "periodic")


def test_test_function_unit_norm_and_band():
    g = _grid()
    f = evo.make_test_function(g, [3.0], 1.0)
    assert evo.grid_norm(g, f.values) == pytest.approx(1.0, abs=1e-13)
    lo, hi = f.support_interval(0)
    assert 0.0 < lo < hi
    xi = np.linspace(-20.0, 20.0, 2001)
    vals = np.abs(f.fhat_axis(0, xi))
    assert vals[(xi <= lo) | (xi >= hi)].max() == 0.0
    assert vals[(xi > lo) & (xi < hi)].max() > 0.0


def test_test_function_avoids_zero_frequency():
    g = _grid()
    with pytest.raises(PreconditionError):
        evo.make_test_function(g, [0.5], 1.0)  # band would touch xi = 0


def test_unitarity_and_identity():
    g = _grid()
    f = evo.make_test_function(g, [4.0], 1.0)
    f0 = evo.evolve_free(f, 0.0, grid=g)
    assert np.allclose(f0, f.values, atol=1e-12)
    ft = evo.evolve_free(f, 2.0, grid=g)
    assert evo.grid_norm(g, ft) == pytest.approx(
        evo.grid_norm(g, f.values), abs=1e-12)


def test_group_law():
    g = _grid()
    f = evo.make_test_function(g, [3.0], 1.0)
    one = evo.evolve_free(f, 3.0, grid=g)
    two = evo.evolve_free(evo.evolve_free(f, 1.5, grid=g), 1.5, grid=g)
    assert np.max(np.abs(one - two)) < 1e-12


def test_fourier_support_invariance():
    # free evolution is a Fourier multiplier: |fhat| is conserved exactly
    g = _grid()
    f = evo.make_test_function(g, [3.0], 1.0)
    before = np.abs(evo.fourier_from_grid(g, f.values))
    after = np.abs(evo.fourier_from_grid(g, evo.evolve_free(f, 2.5, grid=g)))
    assert np.max(np.abs(after - before)) < 1e-12


def test_roundtrip_fourier_transforms():
    g = _grid(N=256)
    rng = np.random.default_rng(0)
    f = rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape)
    back = evo.grid_from_fourier(g, evo.fourier_from_grid(g, f))
    assert np.allclose(back, f, atol=1e-12)


def test_free_particle_momentum_phase():
    # a pure grid harmonic acquires exactly the continuum phase
    # exp(-i xi^2 t) under the band-limited propagator
    g = _grid(L=20.0, N=256)
    x = g.axis_coords()
    xi = 3 * np.pi / 20.0
    wave = np.exp(1j * xi * x)
    evolved = evo.evolve_free(wave, 1.7, grid=g)
    assert np.allclose(evolved, np.exp(-1j * xi ** 2 * 1.7) * wave,
                       atol=1e-12)


def test_box_exit_precondition():
    g = _grid(L=20.0, N=256)
    f = evo.make_test_function(g, [3.0], 1.0)
    with pytest.raises(PreconditionError):
        evo.evolve_free(f, 50.0, grid=g)


def test_cook_integrand_matches_direct_norm():
    g = _grid(L=30.0, N=512)
    f = evo.make_test_function(g, [2.0], 1.0)
    x = g.axis_coords()
    V = 0.7 * np.exp(-x ** 2)
    t = 1.2
    got = evo.cook_integrand(V, f, t)
    direct = evo.grid_norm(g, V * evo.evolve_free(f, t, grid=g))
    assert got == pytest.approx(direct, rel=1e-12)


def test_cook_integrand_callable_potential():
    g = _grid(L=30.0, N=512)
    f = evo.make_test_function(g, [2.0], 1.0)
    t = 0.8
    arr = np.where(np.abs(g.axis_coords()) < 5.0, 1.0, 0.0)
    # a callable V applies the potential to an evolved grid function
    assert evo.cook_integrand(lambda u: arr * u, f, t) == pytest.approx(
        evo.cook_integrand(arr, f, t), rel=1e-12)


def test_decay_slope_exact_power_law():
    ts = evo.geometric_times(1.0, 100.0, 12)
    values = 5.0 * ts ** -2.0
    slope, half_width = evo.decay_slope(ts, values)
    assert slope == pytest.approx(-2.0, abs=1e-10)
    assert half_width < 1e-8


def test_decay_slope_needs_enough_points():
    ts = np.array([1.0, 2.0, 4.0])
    with pytest.raises(Exception):
        evo.decay_slope(ts, ts ** -1.0)


def test_geometric_times_endpoints():
    ts = evo.geometric_times(2.0, 32.0, 5)
    assert ts[0] == pytest.approx(2.0)
    assert ts[-1] == pytest.approx(32.0)
    assert np.allclose(np.diff(np.log(ts)), np.log(2.0))


def test_2d_product_structure():
    g = _grid(d=2, L=30.0, N=128)
    f = evo.make_test_function(g, [3.0, 3.0], 1.0)
    g1 = _grid(d=1, L=30.0, N=128)
    f1 = evo.make_test_function(g1, [3.0], 1.0)
    # the 2-d packet evolves as a product of 1-d evolutions
    e2 = evo.evolve_free(f, 1.1, grid=g)
    e1 = evo.evolve_free(f1, 1.1, grid=g1)
    prod = np.outer(e1, e1)
    prod *= evo.grid_norm(g, e2) / evo.grid_norm(g, prod)
    phase = e2.ravel()[np.argmax(np.abs(e2))] / \
        prod.ravel()[np.argmax(np.abs(e2))]
    assert np.allclose(e2, prod * phase, atol=1e-10)
