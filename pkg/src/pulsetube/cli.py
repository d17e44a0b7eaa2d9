"""Command-line entry points: run, periodic, sweep, check."""
from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import List, Optional

import numpy as np

from . import output as out
from .config import RunConfig, assemble, parse_config
from .errors import (BandCollapseError, ConfigurationError, DecodeError,
                     InstabilityError)
from .period_map import decode, encode, fixed_point
from .scheme import run_period

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INSTABILITY = 3
EXIT_IO = 4
EXIT_NOT_CONVERGED = 5

# CLI flag destinations -> dotted config keys (flags mirror config keys).
_FLAG_KEYS = [
    ("gamma", "gas.gamma"), ("band_scale", "gas.M"), ("eps", "gas.eps"),
    ("n_x", "grid.n_x"), ("forcing", "forcing.name"),
    ("amplitude", "forcing.amplitude"), ("initial", "initial.name"),
    ("rho_bar", "initial.rho_bar"), ("bump", "initial.bump"),
    ("initial_file", "initial.file"), ("omega", "solver.omega"),
    ("tol", "solver.tol"), ("max_iter", "solver.max_iter"),
    ("no_cutoff", "flags.no_cutoff"), ("freeze_l", "flags.freeze_L"),
    ("out", "output.directory"),
]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", nargs="?", default=None,
                        help="TOML config file (flags override its keys)")
    g = common.add_argument_group("config overrides")
    g.add_argument("--gamma", type=float, help="adiabatic exponent in (1, 5/3]")
    g.add_argument("--M", dest="band_scale", type=float,
                   help="invariant-band half-width scale")
    g.add_argument("--eps", type=float, help="band-offset exponent slack")
    g.add_argument("--n-x", type=int, help="cells per unit length (>= 2)")
    g.add_argument("--forcing", choices=("zero", "sin_t", "sin_xt",
                                         "gravity_pulse"))
    g.add_argument("--amplitude", type=float, help="forcing amplitude (>= 0)")
    g.add_argument("--initial", choices=("constant", "bump", "file"))
    g.add_argument("--rho-bar", type=float, help="mean density of builtins")
    g.add_argument("--bump", type=float, help="bump relative amplitude, |a| < 1")
    g.add_argument("--initial-file", help="CSV of x,rho,m node values")
    g.add_argument("--omega", type=float, help="Picard damping in (0, 1]")
    g.add_argument("--tol", type=float, help="fixed-point residual target")
    g.add_argument("--max-iter", type=int, help="fixed-point iteration cap")
    g.add_argument("--no-cutoff", action="store_true", default=None,
                   help="diagnostic: skip band clamp and vacuum floor")
    g.add_argument("--freeze-l", action="store_true", default=None,
                   help="diagnostic: do not grow the band with entropy production")
    g.add_argument("--out", help="output directory (under $PULSETUBE_OUT if set)")

    parser = argparse.ArgumentParser(
        prog="pulsetube",
        description="Staggered finite-volume solver for forced isentropic "
                    "gas in a closed 1D tube, with a periodic-orbit finder.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common],
                   help="march one forcing period from the initial data")
    sub.add_parser("periodic", parents=[common],
                   help="chase a time-periodic solution and certify it")
    sweep = sub.add_parser("sweep", parents=[common],
                           help="repeat the periodic chase over a parameter axis")
    sweep.add_argument("--axis", required=True,
                       choices=("n_x", "amplitude", "gamma"))
    sweep.add_argument("--values", required=True,
                       help="comma-separated axis values (at least 2)")
    sweep.add_argument("--workers", type=int, default=4)
    sub.add_parser("check", parents=[common],
                   help="validate the configuration and print the derived setup")
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides = {}
    for dest, dotted in _FLAG_KEYS:
        value = getattr(args, dest, None)
        if value is not None:
            overrides[dotted] = value
    return parse_config(args.config, overrides)


def _out_dir(cfg: RunConfig) -> str:
    root = os.environ.get("PULSETUBE_OUT")
    if root and not os.path.isabs(cfg.out_dir):
        return os.path.join(root, cfg.out_dir)
    return cfg.out_dir


def _cmd_run(cfg: RunConfig) -> int:
    asm = assemble(cfg)
    layers: List = []
    final, records = run_period(asm.layer0, asm.forcing, asm.gp,
                                no_cutoff=cfg.no_cutoff,
                                freeze_l=cfg.freeze_l,
                                on_layer=layers.append)
    directory = _out_dir(cfg)
    out.ensure_dir(directory)
    if "csv" in cfg.formats:
        out.write_layers_csv(os.path.join(directory, "layers.csv"), layers,
                             asm.gp)
    mass0, mass_end = records[0].mass, records[-1].mass
    summary = {
        "levels": len(records),
        "n_x": asm.grid.n_x, "n_t": asm.grid.n_t,
        "mass": mass_end, "mass_drift": mass_end - mass0,
        "energy": records[-1].energy,
        "entropy_budget_L": final.l_val,
        "band_margin_min": min(r.band_margin_min for r in records),
        "boundary_ok": [bool(records[-1].boundary_ok[0]),
                        bool(records[-1].boundary_ok[1])],
    }
    if "json" in cfg.formats:
        out.write_diagnostics_json(os.path.join(directory, "diagnostics.json"),
                                   records)
        out.write_summary_json(os.path.join(directory, "summary.json"), summary)
    print(f"run: {len(records)} levels, mass drift {summary['mass_drift']:.3e}, "
          f"L = {final.l_val:.6g}, wrote {directory}")
    return EXIT_OK


def _cmd_periodic(cfg: RunConfig) -> int:
    if cfg.no_cutoff:
        raise ConfigurationError(
            "flags.no_cutoff is a diagnostic for 'run'; the periodic "
            "certificate needs the full scheme")
    asm = assemble(cfg)
    point = encode(asm.layer0, asm.gp)
    report = fixed_point(point, asm.forcing, cfg.omega, cfg.tol, cfg.max_iter,
                         asm.gp, asm.grid)
    start = decode(report.final_point, asm.grid, asm.gp)
    final, records = run_period(start, asm.forcing, asm.gp)

    directory = _out_dir(cfg)
    out.ensure_dir(directory)
    if "csv" in cfg.formats:
        out.write_trace_csv(os.path.join(directory, "trace.csv"), report.trace)
        out.write_layers_csv(os.path.join(directory, "periodic_layers.csv"),
                             [start, final], asm.gp)
    residual = float(report.residual_history[-1]) if report.iterations else np.nan
    certificate = {
        "converged": report.converged,
        "iterations": report.iterations,
        "residual": residual,
        "tol": cfg.tol, "omega": cfg.omega,
        "contraction_factor": report.contraction_factor,
        "velocity_profile_unique": bool(report.contraction_factor < 1.0),
        "mass": records[-1].mass,
        "mass_drift_from_mean": records[-1].mass - asm.gp.rho_bar,
        "band_margin_min": min(r.band_margin_min for r in records),
        "entropy_budget_L": final.l_val,
        "box_violations": report.box_violations,
        "aborted": report.aborted,
        "n_x": asm.grid.n_x, "n_t": asm.grid.n_t,
        "gamma": cfg.gamma, "M": cfg.band_scale,
        "forcing": {"name": cfg.forcing_name, "amplitude": cfg.amplitude},
    }
    if "json" in cfg.formats:
        out.write_certificate_json(os.path.join(directory, "certificate.json"),
                                   certificate)
    state = "converged" if report.converged else "NOT converged"
    print(f"periodic: {state} after {report.iterations} iterations, "
          f"residual {residual:.3e}, contraction {report.contraction_factor:.3e}, "
          f"wrote {directory}")
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


def _sweep_one(cfg: RunConfig):
    t0 = time.perf_counter()
    asm = assemble(cfg)
    point = encode(asm.layer0, asm.gp)
    report = fixed_point(point, asm.forcing, cfg.omega, cfg.tol, cfg.max_iter,
                         asm.gp, asm.grid)
    start = decode(report.final_point, asm.grid, asm.gp)
    _, records = run_period(start, asm.forcing, asm.gp)
    runtime = time.perf_counter() - t0
    residual = float(report.residual_history[-1]) if report.iterations else np.nan
    drift = records[-1].mass - asm.gp.rho_bar
    margin = min(r.band_margin_min for r in records)
    return residual, drift, margin, runtime


def _cmd_sweep(cfg: RunConfig, axis: str, values_text: str, workers: int) -> int:
    raw = [v.strip() for v in values_text.split(",") if v.strip()]
    if len(raw) < 2:
        raise ConfigurationError(
            f"sweep needs at least 2 values on axis {axis!r}, got {len(raw)}")
    try:
        values = [int(v) for v in raw] if axis == "n_x" else [float(v) for v in raw]
    except ValueError as exc:
        raise ConfigurationError(f"bad sweep value in {values_text!r}") from exc
    field = {"n_x": "n_x", "amplitude": "amplitude", "gamma": "gamma"}[axis]
    configs = [replace(cfg, **{field: v}) for v in values]
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(_sweep_one, configs))
    rows = [(v,) + r for v, r in zip(values, results)]
    directory = _out_dir(cfg)
    out.ensure_dir(directory)
    out.write_sweep_csv(os.path.join(directory, "sweep.csv"), rows)
    print(f"{'value':>12} {'residual':>12} {'mass_drift':>12} "
          f"{'band_margin':>12} {'runtime_s':>10}")
    for value, residual, drift, margin, runtime in rows:
        print(f"{value:>12} {residual:>12.3e} {drift:>12.3e} "
              f"{margin:>12.4g} {runtime:>10.2f}")
    return EXIT_OK


def _cmd_check(cfg: RunConfig) -> int:
    asm = assemble(cfg)
    print(f"config ok: gamma={asm.gp.gamma}, M={asm.gp.band_scale}, "
          f"eps={asm.gp.eps}")
    print(f"grid: n_x={asm.grid.n_x}, n_t={asm.grid.n_t} "
          f"(dx={asm.grid.dx:.6g}, dt={asm.grid.dt:.6g}, "
          f"ratio={asm.grid.ratio:g})")
    print(f"derived: rho_bar={asm.gp.rho_bar:.12g}, "
          f"energy0={asm.gp.energy0:.12g}, zeta_offset={asm.gp.zeta_offset:.12g}, "
          f"alpha_zeta={asm.gp.alpha_zeta:.12g}")
    print(f"forcing: {cfg.forcing_name} amplitude {cfg.amplitude}")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        if args.command == "run":
            return _cmd_run(cfg)
        if args.command == "periodic":
            return _cmd_periodic(cfg)
        if args.command == "sweep":
            return _cmd_sweep(cfg, args.axis, args.values, args.workers)
        return _cmd_check(cfg)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InstabilityError, BandCollapseError) as exc:
        print(f"run aborted: {exc}", file=sys.stderr)
        return EXIT_INSTABILITY
    except DecodeError as exc:
        print(f"periodic solve failed: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
