"""Run configuration: TOML parsing, validation, and problem assembly."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Tuple

import numpy as np

try:
    import tomllib as tomli
except ModuleNotFoundError:         # 3.10: stdlib has no TOML reader
    import tomli

from .errors import ConfigurationError
from .gas import GasParams, make_params
from .grid import Forcing, Grid, build_grid, builtin_forcing
from .scheme import Layer, init_layer

FORCING_NAMES = ("zero", "sin_t", "sin_xt", "gravity_pulse")
INITIAL_NAMES = ("constant", "bump", "file")
OUTPUT_FORMATS = ("csv", "json")


@dataclass
class RunConfig:
    """Everything a run needs, already type-checked and range-checked."""

    gamma: float = 1.4
    band_scale: float = 8.0
    eps: float = 0.01
    n_x: int = 25
    forcing_name: str = "zero"
    amplitude: float = 0.0
    initial_name: str = "constant"
    rho_bar: float = 1.0
    bump_amp: float = 0.1
    initial_file: Optional[str] = None
    omega: float = 0.5
    tol: float = 1e-8
    max_iter: int = 500
    no_cutoff: bool = False
    freeze_l: bool = False
    out_dir: str = "out"
    formats: Tuple[str, ...] = ("csv", "json")


# TOML section -> {key: (RunConfig field, coercion)}
_SCHEMA = {
    "gas": {"gamma": ("gamma", float), "M": ("band_scale", float),
            "eps": ("eps", float)},
    "grid": {"n_x": ("n_x", int)},
    "forcing": {"name": ("forcing_name", str),
                "amplitude": ("amplitude", float)},
    "initial": {"name": ("initial_name", str), "rho_bar": ("rho_bar", float),
                "bump": ("bump_amp", float), "file": ("initial_file", str)},
    "solver": {"omega": ("omega", float), "tol": ("tol", float),
               "max_iter": ("max_iter", int)},
    "flags": {"no_cutoff": ("no_cutoff", bool), "freeze_L": ("freeze_l", bool)},
    "output": {"directory": ("out_dir", str),
               "formats": ("formats", lambda v: tuple(v))},
}


def _coerce(section, key, value, kind):
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigurationError(
                f"{section}.{key} must be an integer, got {value!r}")
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigurationError(
                f"{section}.{key} must be a number, got {value!r}")
        return float(value)
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigurationError(
                f"{section}.{key} must be true/false, got {value!r}")
        return value
    if kind is str:
        if not isinstance(value, str):
            raise ConfigurationError(
                f"{section}.{key} must be a string, got {value!r}")
        return value
    return kind(value)


def parse_config(path: Optional[str] = None,
                 overrides: Optional[dict] = None) -> RunConfig:
    """Build a :class:`RunConfig` from an optional TOML file plus overrides.

    ``overrides`` maps dotted ``section.key`` names (the same names the
    file uses) to already-typed values; they win over the file.  Unknown
    sections or keys are an error, as are out-of-range values.
    """
    cfg = RunConfig()
    if path is not None:
        try:
            with open(path, "rb") as fh:
                data = tomli.load(fh)
        except tomli.TOMLDecodeError as exc:
            raise ConfigurationError(f"cannot parse {path}: {exc}") from exc
        for section, body in data.items():
            if section not in _SCHEMA:
                raise ConfigurationError(f"unknown config section [{section}]")
            if not isinstance(body, dict):
                raise ConfigurationError(
                    f"[{section}] must be a table of keys")
            for key, value in body.items():
                if key not in _SCHEMA[section]:
                    raise ConfigurationError(
                        f"unknown key {section}.{key}")
                attr, kind = _SCHEMA[section][key]
                cfg = replace(cfg, **{attr: _coerce(section, key, value, kind)})
    for dotted, value in (overrides or {}).items():
        section, _, key = dotted.partition(".")
        if section not in _SCHEMA or key not in _SCHEMA[section]:
            raise ConfigurationError(f"unknown option {dotted}")
        attr, kind = _SCHEMA[section][key]
        cfg = replace(cfg, **{attr: _coerce(section, key, value, kind)})
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if not 1.0 < cfg.gamma <= 5.0 / 3.0 + 1e-12:
        raise ConfigurationError(f"gas.gamma must lie in (1, 5/3], got {cfg.gamma}")
    if cfg.band_scale <= 0:
        raise ConfigurationError(f"gas.M must be positive, got {cfg.band_scale}")
    if cfg.n_x < 2:
        raise ConfigurationError(f"grid.n_x must be at least 2, got {cfg.n_x}")
    if cfg.forcing_name not in FORCING_NAMES:
        raise ConfigurationError(
            f"forcing.name must be one of {FORCING_NAMES}, got {cfg.forcing_name!r}")
    if cfg.amplitude < 0:
        raise ConfigurationError("forcing.amplitude must be nonnegative")
    if cfg.initial_name not in INITIAL_NAMES:
        raise ConfigurationError(
            f"initial.name must be one of {INITIAL_NAMES}, got {cfg.initial_name!r}")
    if cfg.rho_bar <= 0:
        raise ConfigurationError("initial.rho_bar must be positive")
    if not abs(cfg.bump_amp) < 1.0:
        raise ConfigurationError(
            f"initial.bump must satisfy |a| < 1, got {cfg.bump_amp}")
    if cfg.initial_name == "file" and not cfg.initial_file:
        raise ConfigurationError(
            "initial.name = 'file' needs initial.file to point at a CSV")
    if cfg.initial_name != "file" and cfg.initial_file:
        raise ConfigurationError(
            "initial.file is set but initial.name is not 'file'")
    if not 0.0 < cfg.omega <= 1.0:
        raise ConfigurationError(f"solver.omega must lie in (0, 1], got {cfg.omega}")
    if cfg.tol <= 0:
        raise ConfigurationError("solver.tol must be positive")
    if cfg.max_iter < 1:
        raise ConfigurationError("solver.max_iter must be at least 1")
    bad = [f for f in cfg.formats if f not in OUTPUT_FORMATS]
    if bad or not cfg.formats:
        raise ConfigurationError(
            f"output.formats must be a nonempty subset of {OUTPUT_FORMATS}")


def load_initial_file(path: str, n_nodes: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Read node data (x, rho, m) from a CSV with one row per level-0 node."""
    rows: List[Tuple[float, float, float]] = []
    try:
        with open(path, newline="") as fh:
            for raw in csv.reader(fh):
                if not raw or not raw[0].strip():
                    continue
                try:
                    vals = [float(c) for c in raw[:3]]
                except ValueError:
                    continue        # header line
                if len(vals) < 3:
                    raise ConfigurationError(
                        f"{path}: each row needs x,rho,m (got {raw!r})")
                rows.append((vals[0], vals[1], vals[2]))
    except OSError as exc:
        raise ConfigurationError(f"cannot read initial file {path}: {exc}") from exc
    if len(rows) != n_nodes:
        raise ConfigurationError(
            f"initial file {path} has {len(rows)} data rows but the grid "
            f"has {n_nodes} level-0 nodes")
    arr = np.asarray(rows, dtype=float)
    order = np.argsort(arr[:, 0])
    arr = arr[order]
    if np.any(arr[:, 1] < 0):
        raise ConfigurationError(f"initial file {path} contains negative density")
    return arr[:, 0], arr[:, 1], arr[:, 2]


def make_sampler(cfg: RunConfig, n_x: int) -> Callable:
    """Position -> (rho, m) sampler for the configured initial data."""
    if cfg.initial_name == "constant":
        def sample(x):
            x = np.asarray(x, dtype=float)
            return np.full_like(x, cfg.rho_bar), np.zeros_like(x)
        return sample
    if cfg.initial_name == "bump":
        a = cfg.bump_amp

        def sample(x):
            x = np.asarray(x, dtype=float)
            return cfg.rho_bar * (1.0 + a * np.sin(2.0 * np.pi * x)), np.zeros_like(x)
        return sample
    xs, rhos, ms = load_initial_file(cfg.initial_file, 2 * n_x + 1)

    def sample(x):
        x = np.asarray(x, dtype=float)
        return np.interp(x, xs, rhos), np.interp(x, xs, ms)
    return sample


@dataclass
class Assembled:
    """A run, ready to go: parameters, grid, forcing, initial layer."""

    cfg: RunConfig
    gp: GasParams
    grid: Grid
    forcing: Forcing
    layer0: Layer = field(repr=False)


def assemble(cfg: RunConfig) -> Assembled:
    """Turn a validated config into concrete run objects.

    The mean density and total entropy of the *configured* initial field
    (trapezoid rule on the level-0 nodes) feed the offset parameters, so
    the flat equilibrium at rho_bar is an exact fixed point of the scheme.
    """
    n_nodes = 2 * cfg.n_x + 1
    x = np.arange(n_nodes, dtype=float) / (2 * cfg.n_x)
    sampler = make_sampler(cfg, cfg.n_x)
    rho0, m0 = sampler(x)
    rho0 = np.asarray(rho0, dtype=float)
    m0 = np.asarray(m0, dtype=float)
    if np.any(rho0 < 0):
        raise ConfigurationError("initial density must be nonnegative")
    g = cfg.gamma
    with np.errstate(divide="ignore", invalid="ignore"):
        eta = np.where(rho0 > 0.0,
                       m0 ** 2 / np.where(rho0 > 0.0, 2.0 * rho0, 1.0)
                       + rho0 ** g / (g * (g - 1.0)),
                       0.0)
    rho_bar = float(np.trapezoid(rho0, x))
    energy0 = float(np.trapezoid(eta, x))
    if rho_bar <= 0:
        raise ConfigurationError("initial data has no mass")
    forcing = builtin_forcing(cfg.forcing_name, cfg.amplitude)
    gp = make_params(cfg.gamma, cfg.band_scale, eps=cfg.eps,
                     rho_bar=rho_bar, energy0=energy0,
                     force_sup=forcing.amplitude)
    grid = build_grid(cfg.n_x, gp)
    layer0 = init_layer(sampler, grid, gp)
    return Assembled(cfg=cfg, gp=gp, grid=grid, forcing=forcing, layer0=layer0)
