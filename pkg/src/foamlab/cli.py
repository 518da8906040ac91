"""Command-line entry point.

Subcommands: `rve gen`, `rve solve`, `beam solve`, `beam sweep`,
`dataset build`. Values can come from flags or from an INI config file with
sections [rve], [dataset], [beam], [material]; flags win over the file.
Units: RVE scale in mm and MPa, beam scale in m and N (moduli still MPa).

Exit codes: 0 success, 2 configuration error, 3 solver/generation error,
4 partial dataset failure.
"""

import argparse
import configparser
import json
import os
import sys

from .beam import BeamScenario, fuzzy_sweep, ritz_deflection
from .dataset import DatasetConfig, build_dataset, label_envelope_check
from .errors import (
    ConditioningError,
    DatasetBuildError,
    DomainError,
    GenerationError,
    InvalidConfigError,
    MechanismError,
    PerturbationError,
    SingularElementError,
    SolverError,
)
from .framefem import WallMaterial, homogenized_modulus, mesh_geometry, solve_compression
from .fuzzy import make_fuzzy
from .rvegen import RveConfig, generate_rve, load_geometry, rasterize, save_png

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_PARTIAL = 4

CONFIG_KEYS = {
    "rve": {
        "h", "phi_cell", "n_cells", "mu", "t", "min_sep_factor", "morphology",
        "concavity_count", "seed", "px",
    },
    "material": {"e0", "nu0", "rho0"},
    "beam": {
        "l", "b", "h_t", "p", "mu_high", "mu_low", "e2_high", "e2_low",
        "error_band", "n_terms",
    },
    "dataset": {
        "count", "seed", "px", "mu_min", "mu_max", "workers", "t", "h",
        "mix_convex", "mix_concave", "mix_regular",
    },
}


def _load_config(path):
    if path is None:
        return {}
    if not os.path.exists(path):
        raise InvalidConfigError(f"config file not found: {path}")
    cp = configparser.ConfigParser()
    cp.read(path)
    out = {}
    for section in cp.sections():
        if section not in CONFIG_KEYS:
            raise InvalidConfigError(f"unknown config section [{section}]")
        for key in cp[section]:
            if key not in CONFIG_KEYS[section]:
                raise InvalidConfigError(f"unknown key {key!r} in section [{section}]")
            out[f"{section}.{key}"] = cp[section][key]
    return out


def _pick(flag_value, cfg, key, default, cast=float):
    """Flag beats config file beats default."""
    if flag_value is not None:
        return flag_value
    if key in cfg:
        return cast(cfg[key])
    return default


# ---------------------------------------------------------------------------
# rve subcommands
# ---------------------------------------------------------------------------

def _cmd_rve_gen(args):
    cfg = _load_config(args.config)
    config = RveConfig(
        H=_pick(args.H, cfg, "rve.h", 30.0),
        phi_cell=_pick(args.phi_cell, cfg, "rve.phi_cell", None),
        n_cells=_pick(args.cells, cfg, "rve.n_cells", None, int),
        mu_target=_pick(args.mu, cfg, "rve.mu", None),
        t_fixed=_pick(args.t, cfg, "rve.t", None),
        min_sep_factor=_pick(args.min_sep, cfg, "rve.min_sep_factor", 0.3),
        morphology=_pick(args.morphology, cfg, "rve.morphology", "random-convex", str),
        concavity_count=_pick(args.concavity, cfg, "rve.concavity_count", 1, int),
        rng_seed=_pick(args.seed, cfg, "rve.seed", 0, int),
    )
    geom = generate_rve(config)
    out = args.output
    if out.endswith(".txt"):
        geom_path = out
        os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
    else:
        os.makedirs(out, exist_ok=True)
        geom_path = os.path.join(out, "geom.txt")
    geom.save(geom_path)
    print(f"wrote {geom_path} (n_cells={geom.n_cells} L_cell={geom.L_cell:.3f} mm "
          f"t_cell={geom.t_cell:.6f} mm mu={geom.mu_realized:.6f} seed={config.rng_seed})")
    if args.png:
        px = _pick(args.px, cfg, "rve.px", 512, int)
        img = rasterize(geom, px)
        png_path = geom_path[:-4] + ".png" if geom_path.endswith(".txt") else geom_path + ".png"
        save_png(img, png_path)
        print(f"wrote {png_path} ({px}x{px})")
    return EXIT_OK


def _cmd_rve_solve(args):
    cfg = _load_config(args.config)
    geom = load_geometry(args.geometry)
    material = WallMaterial(
        E0=_pick(args.E0, cfg, "material.e0", 61700.0),
        nu0=_pick(args.nu0, cfg, "material.nu0", 0.3),
        rho0=_pick(args.rho0, cfg, "material.rho0", 2700.0),
    )
    model = mesh_geometry(geom, material, target_h=args.target_h,
                          fix_top_rotation=args.fix_top_rot)
    result = solve_compression(model)
    modulus = result.F_top / (0.01 * geom.H * geom.t_cell)
    record = result.to_record(modulus=modulus)
    if args.output:
        with open(args.output, "w") as f:
            json.dump(record, f, indent=1)
        print(f"wrote {args.output}")
    summary = {k: v for k, v in record.items() if k not in ("displacements", "reactions")}
    print(json.dumps(summary, indent=1))
    return EXIT_OK


# ---------------------------------------------------------------------------
# beam subcommands
# ---------------------------------------------------------------------------

def _read_error_band(args, cfg):
    if args.error_band_from:
        with open(args.error_band_from) as f:
            report = json.load(f)
        for key in ("mean_relative_error", "r", "error_band"):
            if key in report:
                return float(report[key])
        raise InvalidConfigError(
            f"no mean_relative_error field in {args.error_band_from}"
        )
    return _pick(args.error_band, cfg, "beam.error_band", 0.0592)


def _beam_scenario(args, cfg):
    r = _read_error_band(args, cfg)
    e2_high = _pick(args.e2_high, cfg, "beam.e2_high", 1693.92)
    e2_low = _pick(args.e2_low, cfg, "beam.e2_low", 865.98)
    return BeamScenario(
        L=_pick(args.L, cfg, "beam.l", 2.0),
        b=_pick(args.b, cfg, "beam.b", 0.1),
        h_T=_pick(args.hT, cfg, "beam.h_t", 0.1),
        P=_pick(args.P, cfg, "beam.p", 100.0),
        mu_high=_pick(args.mu_high, cfg, "beam.mu_high", 0.1381),
        mu_low=_pick(args.mu_low, cfg, "beam.mu_low", 0.0692),
        E_high=make_fuzzy(e2_high, r),
        E_low=make_fuzzy(e2_low, r),
        n_terms=_pick(args.n_terms, cfg, "beam.n_terms", 10, int),
    )


def _cmd_beam_solve(args):
    cfg = _load_config(args.config)
    scn = _beam_scenario(args, cfg)
    delta = ritz_deflection(scn, args.alpha1, args.beta1, args.alpha2, args.beta2)
    print(f"{delta:.3f}")
    return EXIT_OK


def _cmd_beam_sweep(args):
    cfg = _load_config(args.config)
    scn = _beam_scenario(args, cfg)
    grid = fuzzy_sweep(scn, args.layer, alpha_step=args.alpha_step,
                       beta_step=args.beta_step)
    grid.save_csv(args.output)
    print(f"wrote {args.output} ({len(grid.alphas)}x{len(grid.betas)} grid, "
          f"min={grid.values.min():.3f} mm max={grid.values.max():.3f} mm)")
    if args.json:
        with open(args.json, "w") as f:
            json.dump(grid.to_record(scn), f, indent=1)
        print(f"wrote {args.json}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# dataset subcommand
# ---------------------------------------------------------------------------

def _cmd_dataset_build(args):
    cfg = _load_config(args.config)
    mix = (
        _pick(args.mix_convex, cfg, "dataset.mix_convex", 0.90),
        _pick(args.mix_concave, cfg, "dataset.mix_concave", 0.07),
        _pick(args.mix_regular, cfg, "dataset.mix_regular", 0.03),
    )
    dcfg = DatasetConfig(
        count=_pick(args.count, cfg, "dataset.count", None, int),
        out_dir=args.output,
        H=_pick(None, cfg, "dataset.h", 30.0),
        t_fixed=_pick(args.t, cfg, "dataset.t", 0.1142),
        mu_range=(
            _pick(args.mu_min, cfg, "dataset.mu_min", 0.061),
            _pick(args.mu_max, cfg, "dataset.mu_max", 0.201),
        ),
        morphology_mix=mix,
        px=_pick(args.px, cfg, "dataset.px", 512, int),
        master_seed=_pick(args.seed, cfg, "dataset.seed", 0, int),
        E0=_pick(None, cfg, "material.e0", 61700.0),
        nu0=_pick(None, cfg, "material.nu0", 0.3),
    )
    if dcfg.count is None:
        raise InvalidConfigError("count is required (flag --count or [dataset] count)")
    workers = _pick(args.workers, cfg, "dataset.workers", 1, int)
    manifest = build_dataset(dcfg, workers=workers)
    counts = manifest.split_counts()
    report = label_envelope_check(manifest)
    print(f"built {dcfg.count} samples in {dcfg.out_dir}")
    print(f"splits: train={counts['train']} val={counts['val']} test={counts['test']}")
    print(f"labels: min={report['min_mpa']:.1f} max={report['max_mpa']:.1f} "
          f"mean={report['mean_mpa']:.1f} MPa")
    print(f"checksum: {manifest.checksum}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="foamlab", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    # rve
    rve = sub.add_parser("rve", help="RVE generation and homogenization (mm, MPa)")
    rve_sub = rve.add_subparsers(dest="subcommand", required=True)

    g = rve_sub.add_parser("gen", help="generate an RVE wall network")
    g.add_argument("--H", type=float, help="RVE side length, mm (default 30)")
    g.add_argument("--cells", type=int, help="explicit cell count")
    g.add_argument("--phi-cell", dest="phi_cell", type=float, help="mean cell size, mm")
    g.add_argument("--mu", type=float, help="target relative density (0-1)")
    g.add_argument("--t", type=float, help="fixed wall thickness, mm")
    g.add_argument("--min-sep", dest="min_sep", type=float, help="seed separation factor")
    g.add_argument("--morphology", choices=[
        "random-convex", "concave-perturbed", "regular-hex", "regular-square"])
    g.add_argument("--concavity", type=int, help="concave perturbation count")
    g.add_argument("--seed", type=int, help="rng seed (default 0)")
    g.add_argument("--png", action="store_true", help="also rasterize to PNG")
    g.add_argument("--px", type=int, help="raster size, px (default 512)")
    g.add_argument("--config", help="INI config file")
    g.add_argument("-o", "--output", required=True, help="output directory or .txt path")
    g.set_defaults(func=_cmd_rve_gen)

    s = rve_sub.add_parser("solve", help="homogenize a stored geometry")
    s.add_argument("geometry", help="geometry .txt file")
    s.add_argument("--E0", type=float, help="wall Young's modulus, MPa (default 61700)")
    s.add_argument("--nu0", type=float, help="wall Poisson's ratio (default 0.3)")
    s.add_argument("--rho0", type=float, help="wall density, kg/m^3 (default 2700)")
    s.add_argument("--target-h", dest="target_h", type=float,
                   help="mesh size, mm (default H/100)")
    s.add_argument("--fix-top-rot", action="store_true",
                   help="also clamp top-edge rotations")
    s.add_argument("--config", help="INI config file")
    s.add_argument("-o", "--output", help="write full JSON record here")
    s.set_defaults(func=_cmd_rve_solve)

    # beam
    beam = sub.add_parser("beam", help="FG porous beam bending (m, N; moduli MPa)")
    beam_sub = beam.add_subparsers(dest="subcommand", required=True)

    def beam_common(bp):
        bp.add_argument("--L", type=float, help="span, m (default 2)")
        bp.add_argument("--b", type=float, help="width, m (default 0.1)")
        bp.add_argument("--hT", type=float, help="total thickness, m (default 0.1)")
        bp.add_argument("--P", type=float, help="mid-span point load, N (default 100)")
        bp.add_argument("--mu-high", dest="mu_high", type=float,
                        help="face layer relative density (default 0.1381)")
        bp.add_argument("--mu-low", dest="mu_low", type=float,
                        help="core layer relative density (default 0.0692)")
        bp.add_argument("--e2-high", dest="e2_high", type=float,
                        help="crisp face modulus, MPa (default 1693.92)")
        bp.add_argument("--e2-low", dest="e2_low", type=float,
                        help="crisp core modulus, MPa (default 865.98)")
        bp.add_argument("--error-band", dest="error_band", type=float,
                        help="fuzzy half-width r (default 0.0592)")
        bp.add_argument("--error-band-from", dest="error_band_from",
                        help="JSON error report with mean_relative_error")
        bp.add_argument("--n-terms", dest="n_terms", type=int,
                        help="Ritz terms per field (default 10)")
        bp.add_argument("--config", help="INI config file")

    bs = beam_sub.add_parser("solve", help="mid-span deflection at one (alpha, beta)")
    beam_common(bs)
    bs.add_argument("--alpha1", type=float, default=1.0)
    bs.add_argument("--beta1", type=float, default=1.0)
    bs.add_argument("--alpha2", type=float, default=1.0)
    bs.add_argument("--beta2", type=float, default=1.0)
    bs.set_defaults(func=_cmd_beam_solve)

    bw = beam_sub.add_parser("sweep", help="deflection grid over (alpha, beta)")
    beam_common(bw)
    bw.add_argument("--layer", choices=["high", "low", "both"], default="both")
    bw.add_argument("--alpha-step", dest="alpha_step", type=float, default=0.1)
    bw.add_argument("--beta-step", dest="beta_step", type=float, default=0.25)
    bw.add_argument("--json", help="also write JSON metadata here")
    bw.add_argument("-o", "--output", required=True, help="output CSV path")
    bw.set_defaults(func=_cmd_beam_sweep)

    # dataset
    ds = sub.add_parser("dataset", help="batch image+label dataset builds")
    ds_sub = ds.add_subparsers(dest="subcommand", required=True)

    db = ds_sub.add_parser("build", help="generate, homogenize, rasterize, split")
    db.add_argument("--count", type=int, help="total sample count")
    db.add_argument("--seed", type=int, help="master seed (default 0)")
    db.add_argument("--px", type=int, help="image size, px (default 512)")
    db.add_argument("--t", type=float, help="fixed wall thickness, mm (default 0.1142)")
    db.add_argument("--mu-min", dest="mu_min", type=float, help="density range low")
    db.add_argument("--mu-max", dest="mu_max", type=float, help="density range high")
    db.add_argument("--mix-convex", dest="mix_convex", type=float)
    db.add_argument("--mix-concave", dest="mix_concave", type=float)
    db.add_argument("--mix-regular", dest="mix_regular", type=float)
    db.add_argument("--workers", type=int, help="parallel workers (default 1)")
    db.add_argument("--config", help="INI config file")
    db.add_argument("-o", "--output", required=True, help="output directory")
    db.set_defaults(func=_cmd_dataset_build)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InvalidConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DatasetBuildError as exc:
        print(f"dataset error: failed ids {exc.failed_ids}", file=sys.stderr)
        return EXIT_PARTIAL
    except (GenerationError, PerturbationError, MechanismError, SolverError,
            SingularElementError, ConditioningError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
