"""Command-line front end for reproducible runs.

Subcommands: islands | spectrum | mourre | cook | wavelet-check | ids.
Shared flags: --config PATH, --seed U64, --out DIR, --threads N, --plot,
--set key=value (repeatable).  Exit codes: 0 success, 2 config error,
3 numeric precondition violated, 4 solver failure.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys

from .config import load_config_file, resolve
from .errors import (ConfigError, PreconditionError, ResourceError,
                     SolverError)
from .manifest import RunWriter

COMMANDS = ("islands", "spectrum", "mourre", "cook", "wavelet-check", "ids")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="disorderlab",
        description="random Schrödinger operator diagnostics")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None,
                       help="key=value config file (or a manifest.json)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default="runs/latest")
        p.add_argument("--threads", type=int, default=None,
                       help="best-effort BLAS thread cap")
        p.add_argument("--plot", action="store_true",
                       help="emit courtesy SVG plots next to the CSVs")
        p.add_argument("--set", action="append", default=[],
                       metavar="KEY=VALUE", dest="sets")
    return parser


def _load(args) -> dict:
    raw = load_config_file(args.config) if args.config else {}
    cfg = resolve(args.command, raw, args.sets)
    if args.seed is not None:
        cfg["seed"] = args.seed
    return cfg


def _limit_threads(n):
    if n is None:
        return
    try:
        from threadpoolctl import threadpool_limits
        threadpool_limits(limits=n)
    except ImportError:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS"):
            os.environ[var] = str(n)


# ---------------------------------------------------------------------------
# model assembly shared by spectrum / mourre / ids
# ---------------------------------------------------------------------------

def _build_islands(cfg):
    from . import geometry as geo
    kind = cfg["geometry.kind"]
    if kind == "example1":
        return geo.build_example1_islands(cfg["geometry.R"],
                                          cfg["geometry.k_max"])
    if kind == "dyadic":
        return geo.build_dyadic_islands(cfg["geometry.R"],
                                        cfg["geometry.k_max"])
    if kind == "greedy":
        return geo.greedy_pack_islands(
            cfg["grid.d"] if "grid.d" in cfg else 2,
            cfg["geometry.half_extent"], cfg["geometry.beta"],
            cfg["geometry.gamma"], cfg["geometry.radius_scale"])
    raise ConfigError(f"unknown geometry.kind {kind!r}")


def _distribution(cfg):
    from .geometry import CompactDistribution
    return CompactDistribution(cfg["distribution.kind"],
                               cfg["distribution.a"], cfg["distribution.b"],
                               cfg["distribution.shape"])


def _island_model(cfg):
    from . import geometry as geo
    from . import potential as pot
    islands = _build_islands(cfg)
    dist = _distribution(cfg)
    omega = geo.sample_disorder(dist, max(len(islands), 1), cfg["seed"])
    omega = geo.DisorderRealization(omega.couplings[:len(islands)],
                                    cfg["seed"], dist)
    p = pot.IslandPotential(islands, omega, alpha=cfg["geometry.alpha"])
    return islands, dist, p


def _hamiltonian(cfg, p):
    from .grid import GridSpec, assemble_hamiltonian
    grid = GridSpec(cfg["grid.d"], cfg["grid.L"], cfg["grid.N"],
                    cfg["grid.boundary"])
    return grid, assemble_hamiltonian(grid, p)


def _b_field_diag(grid, p):
    import numpy as np
    from .potential import eval_commutator_field, eval_potential
    pts = grid.points()
    return eval_commutator_field(p, pts) - 2.0 * eval_potential(p, pts)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_islands(cfg, writer, plot=False):
    import numpy as np
    from . import geometry as geo
    islands = _build_islands(cfg)
    writer.write_text("islands.json", islands.to_json() + "\n")
    violations = geo.validate_island_set(islands)
    writer.write_text(
        "violations.jsonl",
        "".join(v.to_json() + "\n" for v in violations))
    rows = []
    if len(islands) and islands.dimension == 2 \
            and cfg["geometry.kind"] == "example1":
        for k in range(1, cfg["geometry.k_max"] + 1):
            est = geo.island_density(islands, k, cfg["density.samples"],
                                     seed=cfg["seed"] + k)
            rows.append((k, est.fraction, est.std_error, est.samples))
    writer.write_csv("density.csv",
                     ["k", "fraction", "std_error", "samples"], rows)
    if plot and len(islands):
        _plot_islands(islands, writer)


def cmd_spectrum(cfg, writer, plot=False):
    import numpy as np
    from . import potential as pot
    from . import spectra as spec
    islands, dist, p = _island_model(cfg)
    grid, H = _hamiltonian(cfg, p)
    e0 = pot.compute_E0(islands, cfg["geometry.alpha"], dist.sup_bound,
                        points_per_axis=cfg["e0.points_per_axis"])
    window = (cfg["solver.e_lo"], cfg["solver.e_hi"])
    pairs = spec.solve_window(H, window, cfg["solver.k_max"],
                              tol_scale=cfg["solver.tol"])
    b_diag = _b_field_diag(grid, p)
    report = spec.build_report(
        H, pairs, b_diag, e0.value, e0.value + 1.0, window,
        solver={"k_max": cfg["solver.k_max"], "tol": cfg["solver.tol"],
                "n_unknowns": H.n})
    writer.write_json("report.json", report.to_json_dict())
    writer.write_csv(
        "states.csv",
        ["eigenvalue", "ipr", "decay_rate", "decay_goodness",
         "boundary_weight", "virial_residual"],
        [(st.eigenvalue, st.ipr, st.decay_rate, st.decay_goodness,
          st.boundary_weight, st.virial_residual) for st in report.states])
    if plot and report.states:
        _plot_spectrum(report, writer)


def cmd_mourre(cfg, writer, plot=False):
    from . import potential as pot
    from . import spectra as spec
    islands, dist, p = _island_model(cfg)
    grid, H = _hamiltonian(cfg, p)
    e0 = pot.compute_E0(islands, cfg["geometry.alpha"], dist.sup_bound,
                        points_per_axis=cfg["e0.points_per_axis"])
    e_lo = e0.value + cfg["mourre.window_lo"]
    e_hi = e0.value + cfg["mourre.window_hi"]
    pairs = spec.solve_window(H, (e_lo, e_hi), cfg["solver.k_max"],
                              tol_scale=cfg["solver.tol"])
    if not pairs:
        raise PreconditionError(
            f"no eigenvalues found in the Mourre window ({e_lo}, {e_hi})")
    b_diag = _b_field_diag(grid, p)
    gap = spec.mourre_gap(pairs, H, b_diag)
    writer.write_json("mourre.json", {
        "E0": e0.value,
        "window": [e_lo, e_hi],
        "states": len(pairs),
        "min_eigenvalue": gap,
        "theory_floor": 2.0 * cfg["mourre.window_lo"],
    })


def cmd_cook(cfg, writer, plot=False):
    import numpy as np
    from . import evolution as evo
    from . import geometry as geo
    from . import meyer
    if cfg["evolve.points"] < 8:
        raise PreconditionError(
            f"decay fit needs >= 8 time points, got {cfg['evolve.points']}")
    ts = evo.geometric_times(cfg["evolve.t_lo"], cfg["evolve.t_hi"],
                             cfg["evolve.points"])
    d = cfg["wavelet.d"] if cfg["model"] == "wavelet" else cfg["grid.d"]
    centers = cfg["f.centers"]
    if len(centers) == 1 and d > 1:
        centers = centers * d
    from .grid import GridSpec
    grid = GridSpec(d, cfg["grid.L"], cfg["grid.N"], "periodic")
    f = evo.make_test_function(grid, centers, cfg["f.width"])
    need = 2.0 * f.xi_max * cfg["evolve.t_hi"] + 8.0 / f.width
    dist = _distribution(cfg)
    values = []
    if cfg["model"] == "wavelet":
        fam = meyer.WaveletFamily(dimension=d, K=cfg["wavelet.K"],
                                  n2_max=cfg["wavelet.n2_max"],
                                  scale_cap=cfg["wavelet.scale_cap"])
        indices = fam.indices(f)
        omega = geo.sample_disorder(dist, max(len(indices), 1), cfg["seed"])
        omega = geo.DisorderRealization(omega.couplings[:len(indices)],
                                        cfg["seed"], dist)
        for t in ts:
            values.append(meyer.cook_sum(fam, omega, f, t).norm)
    else:
        if grid.half_length < need:
            raise PreconditionError(
                f"wave packet leaves the box before t={cfg['evolve.t_hi']}: "
                f"need grid.L >= {need:.1f}")
        from . import potential as pot
        from .potential import eval_potential
        islands, dist, p = _island_model(cfg)
        vdiag = eval_potential(p, grid.points()).reshape(grid.shape)
        for t in ts:
            values.append(evo.cook_integrand(vdiag, f, t))
    values = np.asarray(values)
    cumulative = np.concatenate(
        [[0.0], np.cumsum(0.5 * (values[1:] + values[:-1]) * np.diff(ts))])
    writer.write_csv("cook.csv", ["t", "integrand", "cumulative"],
                     [(float(t), float(v), float(c))
                      for t, v, c in zip(ts, values, cumulative)])
    if np.all(values == 0.0):
        slope_obj = {"slope": None, "confidence_half_width": None}
    else:
        slope, hw = evo.decay_slope(ts, values)
        slope_obj = {"slope": slope, "confidence_half_width": hw}
    slope_obj.update({
        "model": cfg["model"],
        "t_range": [cfg["evolve.t_lo"], cfg["evolve.t_hi"]],
        "box": {"L": grid.half_length, "N": grid.points_per_axis,
                "required_L_for_grid_route": need},
        "f": {"centers": list(centers), "width": cfg["f.width"]},
    })
    writer.write_json("slope.json", slope_obj)
    if plot:
        _plot_cook(ts, values, writer)


def cmd_wavelet_check(cfg, writer, plot=False):
    import numpy as np
    from . import meyer
    d = cfg["wavelet.d"]
    n1s = range(-cfg["check.n1_max"], cfg["check.n1_max"] + 1)
    n2s = range(-cfg["check.n2_max"], cfg["check.n2_max"] + 1)
    signs = [c for c in itertools.product((0, 1), repeat=d) if any(c)]
    indices = [meyer.WaveletIndex(c, n1, n2)
               for c in signs for n1 in n1s
               for n2 in itertools.product(*([list(n2s)] * d))]
    gram = meyer.gram_matrix(indices)
    dev = np.abs(gram - np.eye(len(indices)))
    rows = []
    for i, a in enumerate(indices):
        for j, b in enumerate(indices):
            if j < i:
                continue
            rows.append((str(a.c).replace(" ", ""), a.n1,
                         str(a.n2).replace(" ", ""),
                         str(b.c).replace(" ", ""), b.n1,
                         str(b.n2).replace(" ", ""),
                         float(gram[i, j].real), float(gram[i, j].imag)))
    writer.write_csv("gram.csv",
                     ["c_a", "n1_a", "n2_a", "c_b", "n1_b", "n2_b",
                      "re", "im"], rows)
    # support-rule audit on the configured test band
    from .grid import GridSpec
    centers = cfg["f.centers"]
    if len(centers) == 1 and d > 1:
        centers = centers * d
    from . import evolution as evo
    grid = GridSpec(d, 40.0, 256, "periodic")
    f = evo.make_test_function(grid, centers, cfg["f.width"])
    audit = {}
    for c in signs:
        window = meyer.admissible_scales(c, f)
        below = meyer.overlap(
            meyer.WaveletIndex(c, min(window) - 1, (0,) * d), f, 1.0)
        above = meyer.overlap(
            meyer.WaveletIndex(c, max(window) + 1, (0,) * d), f, 1.0)
        audit[str(c)] = {
            "window": [min(window), max(window)],
            "overlap_below_window": abs(below),
            "overlap_above_window": abs(above),
            "exactly_zero_outside": below == 0.0 and above == 0.0,
        }
    writer.write_json("wavelet_summary.json", {
        "indices": len(indices),
        "max_gram_deviation": float(dev.max()),
        "support_rule": audit,
    })


def cmd_ids(cfg, writer, plot=False):
    import numpy as np
    import scipy.linalg as sla
    from . import spectra as spec
    islands, dist, p = _island_model(cfg)
    grid, H = _hamiltonian(cfg, p)
    if H.n > spec.DENSE_ORACLE_LIMIT:
        raise ResourceError(
            f"ids requires a dense solve; N^d = {H.n} exceeds "
            f"{spec.DENSE_ORACLE_LIMIT}")
    eigs = sla.eigvalsh(H.matrix.toarray())
    if cfg["ids.e_max"] > 0.0:
        eigs = eigs[eigs <= cfg["ids.e_max"]]
    edges, density = spec.ids_histogram(eigs, cfg["ids.bins"])
    writer.write_csv("ids.csv", ["bin_lo", "bin_hi", "density"],
                     [(float(lo), float(hi), float(rho))
                      for lo, hi, rho in zip(edges[:-1], edges[1:],
                                             density)])


# ---------------------------------------------------------------------------
# courtesy plots (SVG, derived from the CSV payloads)
# ---------------------------------------------------------------------------

def _matplotlib():
    import matplotlib
    matplotlib.use("svg")
    import matplotlib.pyplot as plt
    return plt


def _plot_islands(islands, writer):
    plt = _matplotlib()
    fig, ax = plt.subplots(figsize=(6, 6))
    for c, r in zip(islands.centers, islands.radii):
        ax.add_patch(plt.Circle((c[0], c[1] if islands.dimension > 1 else 0),
                                r, fill=False))
    lim = float((abs(islands.centers).max() + islands.radii.max()) * 1.05)
    ax.set_xlim(-lim, lim)
    ax.set_ylim(-lim, lim)
    ax.set_aspect("equal")
    fig.savefig(writer.path("islands.svg"))
    writer.register("islands.svg")
    plt.close(fig)


def _plot_spectrum(report, writer):
    plt = _matplotlib()
    fig, ax = plt.subplots(figsize=(7, 4))
    xs = [st.eigenvalue for st in report.states]
    ys = [st.ipr for st in report.states]
    ax.semilogy(xs, ys, ".")
    ax.axvline(report.e0, linestyle="--", label="E0")
    ax.set_xlabel("energy")
    ax.set_ylabel("IPR")
    ax.legend()
    fig.savefig(writer.path("ipr_vs_energy.svg"))
    writer.register("ipr_vs_energy.svg")
    plt.close(fig)


def _plot_cook(ts, values, writer):
    plt = _matplotlib()
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(ts, values, "o-")
    ax.set_xlabel("t")
    ax.set_ylabel("||V exp(i Delta t) f||")
    fig.savefig(writer.path("cook.svg"))
    writer.register("cook.svg")
    plt.close(fig)


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

_DISPATCH = {
    "islands": cmd_islands,
    "spectrum": cmd_spectrum,
    "mourre": cmd_mourre,
    "cook": cmd_cook,
    "wavelet-check": cmd_wavelet_check,
    "ids": cmd_ids,
}


def _fail(code: int, stage: str, exc: Exception) -> int:
    payload = {"error": type(exc).__name__, "stage": stage,
               "message": str(exc)}
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    _limit_threads(args.threads)
    try:
        cfg = _load(args)
    except (ConfigError, FileNotFoundError, json.JSONDecodeError) as exc:
        return _fail(2, "config", exc)
    writer = RunWriter(args.out, args.command, cfg)
    try:
        _DISPATCH[args.command](cfg, writer, plot=args.plot)
    except ConfigError as exc:
        return _fail(2, args.command, exc)
    except (PreconditionError, ResourceError, ValueError) as exc:
        return _fail(3, args.command, exc)
    except SolverError as exc:
        return _fail(4, args.command, exc)
    writer.finish()
    return 0


if __name__ == "__main__":
    sys.exit(main())
