"""Acceptance gate: one pass/fail line per criterion.

Each test prints a single summary line (verdict, key metric, runtime) to
the terminal even under capture, then asserts.  Tolerances are pinned
here; they must not be loosened to force a pass.
"""

import itertools
import math
import os
import time
from unittest import mock

import numpy as np
import pytest
import scipy.linalg as sla
from scipy import stats

from disorderlab import evolution as evo
from disorderlab import geometry as geo
from disorderlab import meyer
from disorderlab import potential as pot
from disorderlab import spectra as spec
from disorderlab.cli import main as cli_main
from disorderlab.grid import (GridSpec, assemble_hamiltonian,
                              boundary_weight, commutator_residual)


def _verdict(capsys, num, name, ok, detail, t0):
    line = (f"ACCEPTANCE {num:02d} {name}: "
            f"{'PASS' if ok else 'FAIL'} ({detail}; {time.monotonic()-t0:.1f}s)")
    with capsys.disabled():
        print(line)
    assert ok, line


# 1 -------------------------------------------------------------------------

def test_acceptance_01_example_geometry(capsys):
    t0 = time.monotonic()
    s = geo.build_example1_islands(1.0, 6)
    counts_ok = len(s) == 6 * 12
    moduli_ok = True
    for k in range(1, 7):
        block = slice(12 * (k - 1), 12 * k)
        m = np.linalg.norm(s.centers[block], axis=1) / 2.0 ** (k - 1)
        moduli_ok &= bool(np.all(np.minimum(
            np.abs(m - math.sqrt(10.0)), np.abs(m - math.sqrt(18.0)))
            < 1e-12))
    violations = geo.validate_island_set(s)
    # the annuli are exact dyadic rescalings of each other, so one
    # million-sample density estimate transfers to every annulus
    selfsim = all(
        np.allclose(s.centers[12 * k:12 * (k + 1)],
                    2.0 * s.centers[12 * (k - 1):12 * k]) and
        np.allclose(s.radii[12 * k:12 * (k + 1)],
                    2.0 * s.radii[12 * (k - 1):12 * k])
        for k in range(1, 6))
    est = geo.island_density(s, 1, 1000000, seed=2)
    dens_ok = abs(est.fraction - math.pi / 4.0) <= 3.0 * est.std_error
    ok = counts_ok and moduli_ok and not violations and selfsim and dens_ok
    _verdict(capsys, 1, "example geometry", ok,
             f"violations={len(violations)}, density={est.fraction:.5f}"
             f"±{est.std_error:.5f} vs {math.pi/4:.5f}", t0)


# 2 -------------------------------------------------------------------------

def test_acceptance_02_commutator_order(capsys):
    t0 = time.monotonic()
    res = []
    for n in (64, 128, 256):
        g = GridSpec(1, 10.0, n, "dirichlet")
        H = assemble_hamiltonian(g, None)
        x = g.axis_coords()
        res.append(commutator_residual(H, None, np.exp(-x ** 2)))
    fit = stats.linregress(np.log([64, 128, 256]), np.log(res))
    slope = -fit.slope
    ok = abs(slope - 2.0) <= 0.2
    _verdict(capsys, 2, "commutator h^2 order", ok,
             f"slope={slope:.3f} (target 2.0±0.2)", t0)


# 3 -------------------------------------------------------------------------

def test_acceptance_03_threshold_E0(capsys):
    t0 = time.monotonic()
    islands = geo.build_example1_islands(1.0, 3)
    base = pot.compute_E0(islands, 0.0, 1.0, points_per_axis=24)
    scaled = pot.compute_E0(islands, 0.0, 3.7, points_per_axis=24)
    homogeneous = scaled.value == 3.7 * base.value

    # 10x-refined independent brute force on each ball
    n_ref = 240
    u = np.linspace(-1.0, 1.0, n_ref)
    U = np.stack(np.meshgrid(u, u, indexing="ij"), axis=-1).reshape(-1, 2)
    U = U[np.linalg.norm(U, axis=1) < 1.0]
    dist = geo.CompactDistribution("uniform", 1.0, 1.0)
    om = geo.DisorderRealization(np.ones(1), 0, dist)
    sup = 0.0
    for c, r in zip(islands.centers, islands.radii):
        one = geo.IslandSet(dimension=2, centers=c.reshape(1, 2),
                            radii=np.array([r]), beta=1.0, gamma=1.0,
                            c1=0.01, c2=100.0)
        p1 = pot.IslandPotential(one, om, alpha=0.0)
        x = c + r * U
        field = np.abs(pot.eval_commutator_field(p1, x)
                       - 2.0 * pot.eval_potential(p1, x))
        sup = max(sup, float(field.max()))
    refined = 0.5 * sup
    rel = abs(refined - base.value) / refined
    ok = homogeneous and rel < 0.01
    _verdict(capsys, 3, "threshold E0", ok,
             f"homogeneous={homogeneous}, refined rel diff={rel:.4f} "
             f"(target <0.01)", t0)


# 4 -------------------------------------------------------------------------

def _dyadic_model(seed=3, amplitude=1.0):
    islands = geo.build_dyadic_islands(1.0, 5)
    dist = geo.CompactDistribution("uniform", -amplitude, amplitude)
    om = geo.sample_disorder(dist, len(islands), seed=seed)
    return islands, dist, pot.IslandPotential(islands, om, alpha=0.0)


def test_acceptance_04_virial_localization(capsys):
    t0 = time.monotonic()
    islands, dist, p = _dyadic_model()
    e0 = pot.compute_E0(islands, 0.0, 1.0, points_per_axis=64).value
    g = GridSpec(1, 96.0, 2048, "dirichlet")
    H = assemble_hamiltonian(g, p)
    pts = g.points()
    b = (pot.eval_commutator_field(p, pts)
         - 2.0 * pot.eval_potential(p, pts))
    vals, vecs = sla.eigh(H.matrix.toarray())
    accepted = violators = 0
    for lam, v in zip(vals[:500], vecs.T[:500]):
        if boundary_weight(g, v) >= 1e-6:
            continue
        if abs(2.0 * lam + np.vdot(v, b * v).real) \
                >= 0.05 * max(abs(lam), 1.0):
            continue
        accepted += 1
        if lam > e0 + 0.1:
            violators += 1

    # deep-well control: a genuine localized state must pass the filter
    well = geo.IslandSet(dimension=1, centers=np.array([[0.0]]),
                         radii=np.array([2.0]), beta=1.0, gamma=1.0,
                         c1=0.01, c2=100.0)
    omw = geo.DisorderRealization(np.array([-30.0]),
                                  0, geo.CompactDistribution(
                                      "uniform", -30.0, -30.0))
    pw = pot.IslandPotential(well, omw, alpha=0.0)
    gw = GridSpec(1, 12.0, 1024, "dirichlet")
    Hw = assemble_hamiltonian(gw, pw)
    ground = spec.solve_window(Hw, (-30.0, -20.0), 1)[0]
    bw_pts = gw.points()
    bw_diag = (pot.eval_commutator_field(pw, bw_pts)
               - 2.0 * pot.eval_potential(pw, bw_pts))
    vir = spec.virial_residual(ground, bw_diag, grid=gw)
    control_ok = (not vir.flagged
                  and vir.value < 0.05 * abs(ground.eigenvalue))

    # Anderson reference at matched energies above E0 (amplitude 8 makes
    # the reference strongly localized; recorded as the comparison config)
    window = (e0 + 0.5, e0 + 2.5)
    sel = (vals > window[0]) & (vals < window[1])
    ipr_island = np.median([spec.ipr(v) for v in vecs.T[sel]])
    site_disorder = 8.0 * (2.0 * geo.counter_uniform(
        12345, np.arange(g.unknowns_total)) - 1.0)
    Ha = assemble_hamiltonian(g, site_disorder)
    va, Va = sla.eigh(Ha.matrix.toarray())
    sela = (va > window[0]) & (va < window[1])
    ipr_anderson = np.median([spec.ipr(v) for v in Va.T[sela]])
    ratio = ipr_anderson / ipr_island

    ok = (accepted > 0 and violators == 0 and control_ok and ratio >= 5.0)
    _verdict(capsys, 4, "virial localization", ok,
             f"filtered={accepted}, above-E0 violators={violators}, "
             f"control={control_ok}, IPR ratio={ratio:.1f} (target >=5)",
             t0)


# 5 -------------------------------------------------------------------------

def test_acceptance_05_mourre_gap(capsys):
    t0 = time.monotonic()
    islands, dist, p = _dyadic_model(amplitude=0.3)
    e0 = pot.compute_E0(islands, 0.0, 0.3, points_per_axis=64).value
    g = GridSpec(1, 96.0, 2048, "dirichlet")
    H = assemble_hamiltonian(g, p)
    window = (e0 + 1.0, e0 + 2.0)
    pairs = spec.solve_window(H, window, 48)
    pts = g.points()
    b = (pot.eval_commutator_field(p, pts)
         - 2.0 * pot.eval_potential(p, pts))
    gap = spec.mourre_gap(pairs, H, b)
    floor = 2.0 * 1.0 - 0.1
    ok = len(pairs) > 0 and gap >= floor
    _verdict(capsys, 5, "mourre gap", ok,
             f"states={len(pairs)}, min-eig={gap:.3f} (floor {floor})", t0)


# 6 -------------------------------------------------------------------------

def test_acceptance_06_free_evolution(capsys):
    t0 = time.monotonic()
    worst = 0.0
    for d, n in ((1, 512), (2, 512)):
        g = GridSpec(d, 40.0, n, "periodic")
        f = evo.make_test_function(g, [3.0] * d, 1.0)
        norm0 = evo.grid_norm(g, f.values)
        ft = evo.evolve_free(f, 2.0, grid=g)
        worst = max(worst, abs(evo.grid_norm(g, ft) - norm0))
        one = evo.evolve_free(f, 3.0, grid=g)
        two = evo.evolve_free(evo.evolve_free(f, 1.25, grid=g), 1.75,
                              grid=g)
        worst = max(worst, float(np.max(np.abs(one - two))))
        before = np.abs(evo.fourier_from_grid(g, f.values))
        after = np.abs(evo.fourier_from_grid(g, ft))
        worst = max(worst, float(np.max(np.abs(after - before))))
    ok = worst < 1e-12
    _verdict(capsys, 6, "free evolution", ok,
             f"worst deviation={worst:.2e} (target <1e-12)", t0)


# 7 -------------------------------------------------------------------------

def test_acceptance_07_cook_decay(capsys):
    t0 = time.monotonic()
    g = GridSpec(2, 40.0, 128, "periodic")
    f = evo.make_test_function(g, [3.0, 3.0], 1.0)
    fam = meyer.WaveletFamily(dimension=2)
    dist = geo.CompactDistribution("uniform", -1.0, 1.0)
    om = geo.sample_disorder(dist, len(fam.indices(f)), seed=17)

    ts = evo.geometric_times(10.0, 100.0, 16)
    values = np.array([meyer.cook_sum(fam, om, f, t).norm for t in ts])
    slope, _ = evo.decay_slope(ts, values)

    # cumulative increments over successive doubling windows [T, 2T]
    fine = 10.0 * 2.0 ** (np.arange(25) / 8.0)        # [10, 80]
    vfine = np.array([meyer.cook_sum(fam, om, f, t).norm for t in fine])
    increments = [np.trapezoid(vfine[8 * j:8 * j + 9],
                               fine[8 * j:8 * j + 9]) for j in range(3)]
    monotone = increments[0] > increments[1] > increments[2]

    ok = slope <= -1.5 and monotone
    _verdict(capsys, 7, "cook decay", ok,
             f"slope={slope:.2f} (target <=-1.5), increments="
             f"{['%.2e' % i for i in increments]}", t0)


# 8 -------------------------------------------------------------------------

def test_acceptance_08_wavelet_family(capsys):
    t0 = time.monotonic()
    indices = [meyer.WaveletIndex((1,), n1, (m,))
               for n1 in (-1, 0, 1) for m in range(-8, 9)]
    assert len(indices) >= 50
    gram = meyer.gram_matrix(indices)
    gram_dev = float(np.max(np.abs(gram - np.eye(len(indices)))))

    g = GridSpec(1, 40.0, 256, "periodic")
    f = evo.make_test_function(g, [3.0], 1.0)
    window = meyer.admissible_scales((1,), f)
    below = meyer.overlap(
        meyer.WaveletIndex((1,), min(window) - 1, (0,)), f, 1.0)
    above = meyer.overlap(
        meyer.WaveletIndex((1,), max(window) + 1, (0,)), f, 1.0)
    selection_exact = below == 0.0 and above == 0.0

    # translation-tail envelope: in the decay regime the overlaps stay
    # inside the 1/(1+m^2) shape (log-log slope <= -2, strong linear fit)
    ms = np.unique(np.round(np.geomspace(8.0, 512.0, 24)).astype(int))
    A = np.array([abs(meyer.overlap(meyer.WaveletIndex((1,), 0, (int(m),)),
                                    f, 1.0)) for m in ms])
    fit = stats.linregress(np.log(1.0 + ms.astype(float) ** 2), np.log(A))
    r2 = fit.rvalue ** 2
    envelope_ok = r2 >= 0.9 and fit.slope <= -1.0

    ok = gram_dev < 1e-8 and selection_exact and envelope_ok
    _verdict(capsys, 8, "wavelet family", ok,
             f"gram dev={gram_dev:.1e} (target <1e-8), "
             f"selection exact={selection_exact}, "
             f"envelope R2={r2:.3f} slope={fit.slope:.2f}", t0)


# 9 -------------------------------------------------------------------------

def test_acceptance_09_solver_oracle(capsys):
    t0 = time.monotonic()
    islands, dist, p = _dyadic_model(seed=5)
    g = GridSpec(1, 48.0, 1024, "dirichlet")   # N^d = 1023 <= 4096
    H = assemble_hamiltonian(g, p)
    dense = np.sort(sla.eigvalsh(H.matrix.toarray()))
    window = (-2.0, 2.0)
    with mock.patch.object(spec, "DENSE_ORACLE_LIMIT", 100):
        pairs = spec.solve_window(H, window, 40)   # forces shift-invert
    ref = dense[(dense > window[0]) & (dense < window[1])][:40]
    got = np.sort([q.eigenvalue for q in pairs])
    count_ok = len(got) == len(ref)
    err = float(np.max(np.abs(got - ref))) if count_ok else math.inf
    ok = count_ok and err < 1e-8 * H.scale()
    _verdict(capsys, 9, "solver oracle", ok,
             f"states={len(got)}/{len(ref)}, max |diff|={err:.2e} "
             f"(tol {1e-8 * H.scale():.2e})", t0)


# 10 ------------------------------------------------------------------------

def test_acceptance_10_reproducibility(capsys, tmp_path):
    t0 = time.monotonic()
    base = ["--set", "geometry.kind=dyadic", "--set", "geometry.k_max=3",
            "--set", "grid.L=24", "--set", "grid.N=256",
            "--set", "solver.e_lo=-3", "--set", "solver.e_hi=1",
            "--set", "distribution.a=-2", "--set", "distribution.b=2"]
    first = str(tmp_path / "one")
    second = str(tmp_path / "two")
    rc1 = cli_main(["spectrum", "--out", first] + base)
    rc2 = cli_main(["spectrum", "--out", second,
                    "--config", os.path.join(first, "manifest.json")])
    identical = rc1 == 0 and rc2 == 0
    compared = 0
    for name in sorted(os.listdir(first)):
        if name == "manifest.json" or not name.endswith((".csv", ".json")):
            continue
        compared += 1
        a = open(os.path.join(first, name), "rb").read()
        b = open(os.path.join(second, name), "rb").read()
        identical &= a == b
    ok = identical and compared >= 2
    _verdict(capsys, 10, "reproducibility", ok,
             f"compared {compared} payload files, byte-identical={identical}",
             t0)
