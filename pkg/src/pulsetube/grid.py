"""Staggered space-time mesh and the periodic outer force.

The mesh covers [0, 1] with nodes x_j = j * dx, j = 0..2*n_x, and one
forcing period in time with 2*n_t steps of size dt.  States live on
alternating node sets: level n carries exactly the nodes j with j + n odd,
so interior nodes own cells of width 2*dx and, on the levels that include
the walls, the wall nodes own half cells of width dx.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigurationError
from .gas import GasParams

#: refuse to build a grid needing more half-steps than this per period
MAX_HALF_STEPS = 2_000_000


@dataclass(frozen=True)
class Grid:
    n_x: int          # half-cell count; 2*n_x + 1 nodes
    n_t: int          # half-step count; 2*n_t steps per period
    dx: float
    dt: float
    ratio: float      # dx / dt, an integer >= floor(2*band_scale) + 1
    x: np.ndarray = field(repr=False)  # node coordinates, length 2*n_x + 1


def build_grid(n_x: int, gp: GasParams) -> Grid:
    """Build the mesh for one period.

    The stability rule fixes the target ratio dx/dt = floor(2*band_scale)+1;
    since the period must also split into an even number of equal steps,
    dt is rounded down to 1/(2*n_t) with n_t = ceil(ratio * n_x).  For this
    rule the ceiling is exact: n_t = ratio * n_x, keeping dx/dt at the
    target exactly while 2*n_t*dt = 1 holds by construction.
    """
    if int(n_x) != n_x or n_x < 2:
        raise ConfigurationError(f"n_x must be an integer >= 2, got {n_x}")
    n_x = int(n_x)
    q = int(np.floor(2.0 * gp.band_scale)) + 1
    n_t = q * n_x
    if n_t > MAX_HALF_STEPS:
        raise ConfigurationError(
            f"grid needs {n_t} half-steps per period (n_x={n_x}, "
            f"speed ratio {q}); refusing above {MAX_HALF_STEPS}")
    dx = 1.0 / (2 * n_x)
    dt = 1.0 / (2 * n_t)
    # j / (2 n_x) rather than j * dx: correctly rounded at every node,
    # and the walls land on exactly 0.0 and 1.0.
    x = np.arange(2 * n_x + 1, dtype=float) / (2 * n_x)
    return Grid(n_x=n_x, n_t=n_t, dx=dx, dt=dt, ratio=n_t / n_x, x=x)


def stagger(n: int, grid: Grid) -> np.ndarray:
    """Node indices active at level n: all j in 0..2*n_x with j + n odd."""
    if not 0 <= n <= 2 * grid.n_t:
        raise ValueError(f"level {n} outside 0..{2 * grid.n_t}")
    start = 1 if n % 2 == 0 else 0
    return np.arange(start, 2 * grid.n_x + 1, 2)


def cell_widths(n: int, grid: Grid) -> np.ndarray:
    """Cell widths owned by the active nodes of level n, in node order.

    Interior nodes own 2*dx; on odd levels the two wall nodes own the
    half cells [0, dx) and [1 - dx, 1].  The widths always sum to 1.
    """
    idx = stagger(n, grid)
    widths = np.full(idx.shape, 2.0 * grid.dx)
    if n % 2 == 1:
        widths[0] = grid.dx
        widths[-1] = grid.dx
    return widths


@dataclass(frozen=True)
class Forcing:
    """Periodic outer force: a vectorized evaluator (x, t) -> value.

    Evaluators must be 1-periodic in t; the builtins guarantee
    F(x, 0) == F(x, 1) exactly by reducing t modulo 1 before use.
    """

    name: str
    amplitude: float
    fn: Callable[[np.ndarray, float], np.ndarray] = field(repr=False)

    def __call__(self, x, t):
        return self.fn(np.asarray(x, dtype=float), float(t))


def _zero(x, t):
    return np.zeros_like(x)


def _sin_t(amplitude):
    def fn(x, t):
        return np.full_like(x, amplitude * np.sin(2.0 * np.pi * (t % 1.0)))
    return fn


def _sin_xt(amplitude):
    def fn(x, t):
        return amplitude * np.sin(2.0 * np.pi * (t % 1.0)) * np.sin(np.pi * x)
    return fn


def _gravity_pulse(amplitude):
    # a smoothly switched-on body force, zero at both walls and at t = 0, 1
    def fn(x, t):
        ramp = 0.5 * (1.0 - np.cos(2.0 * np.pi * (t % 1.0)))
        return amplitude * ramp * x * (1.0 - x)
    return fn


def builtin_forcing(name: str, amplitude: float = 0.0) -> Forcing:
    """Named forcing families used by the CLI and the test suite."""
    amplitude = float(amplitude)
    if name == "zero":
        return Forcing(name=name, amplitude=0.0, fn=_zero)
    if name == "sin_t":
        return Forcing(name=name, amplitude=abs(amplitude), fn=_sin_t(amplitude))
    if name == "sin_xt":
        return Forcing(name=name, amplitude=abs(amplitude), fn=_sin_xt(amplitude))
    if name == "gravity_pulse":
        return Forcing(name=name, amplitude=abs(amplitude) / 4.0,
                       fn=_gravity_pulse(amplitude))
    raise ConfigurationError(
        f"unknown forcing {name!r}; pick one of zero, sin_t, sin_xt, gravity_pulse")
