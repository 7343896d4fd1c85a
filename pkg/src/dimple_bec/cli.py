"""Command-line entry point.

    dimple-bec spectrum --lambda 0 --z1 0 --levels 3
    dimple-bec fig 1 --out-dir out --format csv+svg
    dimple-bec all --config run.cfg
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import density, thermo
from .config import FORMATS, ConfigError, RunConfig, load_config_file
from .figures import CSV_FORMAT, FigureDataset, Pipeline, PipelineError
from .spectrum import SpectrumError, solve_count

MANIFEST = "manifest.json"


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="key=value file; flags override it")
    p.add_argument("--n", dest="n_particles", type=int, help="particle number")
    p.add_argument("--mass-amu", type=float)
    p.add_argument("--omega-hz", type=float, help="trap frequency in Hz (times 2 pi)")
    p.add_argument("--lambda", dest="lam", type=float, help="dimensionless delta strength")
    p.add_argument("--z1", type=float, help="dimensionless delta position")
    p.add_argument("--levels", type=int, help="number of levels kept (default: m2)")
    p.add_argument("--m1", type=int, help="levels solved as exact roots")
    p.add_argument("--m2", type=int, help="levels given a first-order shift")
    p.add_argument("--out-dir", type=Path)
    p.add_argument("--cache-dir", type=Path, help="spectrum cache (default: OUT_DIR/cache)")
    p.add_argument("--format", dest="fmt", choices=FORMATS)


def _temperature(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--temperature", type=float, help="temperature in kelvin")
    g.add_argument("--t-over-tc0", type=float, help="temperature relative to the bare T_c")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dimple-bec",
        description="Ideal Bose gas in a harmonic trap with a delta-function dimple.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in [("spectrum", "print the lowest levels xi_n"),
                       ("tc", "critical temperature with and without the dimple"),
                       ("mu", "chemical potential at one temperature"),
                       ("fraction", "condensate fraction at one temperature"),
                       ("density", "ground-state density profile"),
                       ("all", "every figure plus a run manifest")]:
        p = sub.add_parser(name, help=text)
        _common(p)
        if name in ("mu", "fraction"):
            _temperature(p)
    p = sub.add_parser("fig", help="one figure dataset")
    p.add_argument("figure", type=int, choices=range(1, 6), metavar="{1..5}")
    _common(p)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    base = load_config_file(args.config) if args.config is not None else {}
    keys = ("n_particles", "mass_amu", "omega_hz", "lam", "z1", "levels", "m1", "m2",
            "out_dir", "cache_dir", "fmt", "temperature", "t_over_tc0")
    flags = {k: getattr(args, k, None) for k in keys}
    base.update({k: v for k, v in flags.items() if v is not None})
    try:
        return RunConfig(**base)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def _fmt(v: float) -> str:
    return CSV_FORMAT.format(float(v) + 0.0)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _emit(ds: FigureDataset, stem: str, cfg: RunConfig, out) -> list[Path]:
    paths = [ds.write_csv(cfg.out_dir / f"{stem}.csv")]
    side = cfg.out_dir / f"{stem}.json"
    side.write_text(json.dumps(ds.metadata, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    paths.append(side)
    if cfg.svg:
        from .plotting import render

        paths.append(render([ds], cfg.out_dir / f"{stem}.svg"))
    for p in paths:
        extra = f" ({len(ds.rows)} rows)" if p.suffix == ".csv" else ""
        print(f"wrote {p}{extra} digest={ds.digest}", file=out)
    return paths


def _temperature_tau(cfg: RunConfig, pipe: Pipeline) -> float:
    if cfg.temperature is not None:
        if not cfg.temperature > 0:
            raise ConfigError("temperature must be positive")
        return cfg.temperature / pipe.kelvin_per_tau
    if cfg.t_over_tc0 is not None:
        if not cfg.t_over_tc0 > 0:
            raise ConfigError("t-over-tc0 must be positive")
        return cfg.t_over_tc0 * pipe.tau_c0
    raise ConfigError("give --temperature or --t-over-tc0")


def run(args: argparse.Namespace, out=None) -> int:
    out = out if out is not None else sys.stdout
    cfg = resolve_config(args)
    cmd = args.command

    if cmd == "spectrum":
        from .spectrum import DimpleSpec, solve_spectrum

        spec = solve_spectrum(DimpleSpec(cfg.lam, cfg.z1), cfg.solver, cfg.level_count)
        print(",".join(_fmt(x) for x in spec.xis), file=out)
        return 0

    pipe = Pipeline(cfg)
    if cmd == "tc":
        spec = pipe.spectrum(cfg.lam, cfg.z1)
        tau_c = thermo.critical_tau(spec, cfg.n_particles)
        k = pipe.kelvin_per_tau
        print(f"tc_kelvin={_fmt(tau_c * k)} tc0_kelvin={_fmt(pipe.tau_c0 * k)} "
              f"tc_over_tc0={_fmt(tau_c / pipe.tau_c0)}", file=out)
        return 0

    if cmd in ("mu", "fraction"):
        tau = _temperature_tau(cfg, pipe)
        spec = pipe.spectrum(cfg.lam, cfg.z1)
        gap, n0, total = thermo.solve_mu_reduced(spec, cfg.n_particles, tau)
        mu_red = float(spec.xis[0]) + 0.5 - gap * tau
        t_k = tau * pipe.kelvin_per_tau
        if cmd == "mu":
            print(f"temperature_kelvin={_fmt(t_k)} mu_joule={_fmt(mu_red * cfg.trap.quantum)} "
                  f"mu_over_hbar_omega={_fmt(mu_red)}", file=out)
        else:
            print(f"temperature_kelvin={_fmt(t_k)} n0={_fmt(n0)} "
                  f"fraction={_fmt(n0 / cfg.n_particles)}", file=out)
        return 0

    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    if cmd == "density":
        from .spectrum import DimpleSpec

        gs = density.ground_state(DimpleSpec(cfg.lam, cfg.z1), pipe.spectrum(cfg.lam, cfg.z1))
        grid = cfg.z_grid.values()
        prof = density.density_profile(gs, grid)
        ds = FigureDataset(5, ("z", "rho"), np.column_stack([grid, prof.values]),
                           {"config_digest": cfg.digest(), "lam": cfg.lam, "z1": cfg.z1,
                            "xi0": gs.xi0})
        _emit(ds, "density", cfg, out)
        return 0

    if cmd == "fig":
        _emit(pipe.figure(args.figure), f"fig{args.figure}", cfg, out)
        return 0

    # all
    before = solve_count()
    artifacts = {}
    for fig in range(1, 6):
        for p in _emit(pipe.figure(fig), f"fig{fig}", cfg, out):
            if p.suffix == ".csv":
                artifacts[p.name] = _sha256(p)
    manifest = {
        "config_digest": cfg.digest(),
        "config": cfg.physics(),
        "fresh_root_solves": solve_count() - before,
        "cache": {"hits": pipe.cache.hits, "misses": pipe.cache.misses,
                  "directory": str(cfg.cache_path)},
        "artifacts": artifacts,
    }
    path = cfg.out_dir / MANIFEST
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {path} fresh_root_solves={manifest['fresh_root_solves']} "
          f"digest={cfg.digest()}", file=out)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(args)
    except ConfigError as exc:
        print(f"dimple-bec: config error: {exc}", file=sys.stderr)
        return 2
    except (SpectrumError, PipelineError, thermo.ThermoError, ValueError, RuntimeError) as exc:
        print(f"dimple-bec: {args.command} failed: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"dimple-bec: I/O error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
