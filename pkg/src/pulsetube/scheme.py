"""The staggered time stepper.

One step averages the two neighbouring states of the previous level onto
each node of the next level and corrects the average with (a) the usual
flux differences, (b) the source corrections R (mass) and S (momentum)
built from the diagonal source terms of the characteristic form, and
(c) the outer force itself.  After the raw update the states are pushed
back into the invariant-region band

    -M_n - L + I_j  <=  z(u_j),      w(u_j)  <=  M_n + L + I_j,

where M_n shrinks geometrically over the period, L accumulates the
entropy production of the averaging, and I_j is the running integral of
the band functional zeta.  Densities below dx**delta are flushed to exact
vacuum so no source term ever divides by a vanishing sound speed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import diagnostics
from .errors import BandCollapseError, ConfigurationError, InstabilityError
from .gas import (GasParams, from_invariants, g_source, momentum_flux,
                  to_invariants, velocity, v_flux, zeta)
from .grid import Forcing, Grid, cell_widths, stagger

#: densities larger than this abort the run as blown up even while finite
RHO_BLOWUP = 1e12


@dataclass
class Layer:
    """States on one staggered time level (treated as immutable).

    ``rho``/``m`` hold the states at the active nodes of ``level`` in
    ascending node order; ``i_vals`` the matching running zeta-integrals;
    ``l_val`` the entropy production accumulated since level 0.  Stepped
    layers remember the band edges that the cutoff actually enforced
    (``band_lo``/``band_hi``; None on freshly initialized layers), plus the
    entropy-production increment of the step that created them.
    """

    level: int
    rho: np.ndarray
    m: np.ndarray
    i_vals: np.ndarray
    l_val: float
    grid: Grid
    band_lo: Optional[np.ndarray] = None
    band_hi: Optional[np.ndarray] = None
    l_increment: float = 0.0

    @property
    def indices(self) -> np.ndarray:
        return stagger(self.level, self.grid)

    @property
    def widths(self) -> np.ndarray:
        return cell_widths(self.level, self.grid)


@dataclass
class SourceTerms:
    """Per-node source data at one level (all zero at vacuum nodes)."""

    R: np.ndarray     # mass correction
    S: np.ndarray     # momentum correction
    G: np.ndarray     # left-family diagonal source g1
    H: np.ndarray     # right-family diagonal source g2
    xi: np.ndarray    # momentum-flux moment of the node pair (j, j+2)


def vacuum_exponent(gp: GasParams) -> float:
    """Exponent delta of the vacuum threshold dx**delta.

    Midpoint of the admissible window (1, 1/(2*theta)); any value in the
    open interval keeps the flushed mass asymptotically negligible while
    still protecting the 1/rho**theta factors in the sources.
    """
    return 0.5 * (1.0 + 1.0 / (2.0 * gp.theta))


def zeta_cumulative(rho, m, level, grid: Grid, gp: GasParams) -> np.ndarray:
    """Running integral of zeta for states living on ``level``'s nodes.

    I_j integrates the piecewise-constant zeta field from the left wall to
    the midpoint of node j's own cell: full cells left of j plus half of
    j's cell.  On wall-bearing levels the wall cells have half width, so
    I at the left wall starts at dx/2 * zeta rather than 0.
    """
    zv = zeta(rho, m, gp)
    contrib = zv * cell_widths(level, grid)
    csum = np.cumsum(contrib)
    return csum - 0.5 * contrib


def functional_I(layer: Layer, gp: GasParams) -> np.ndarray:
    """Recompute the running zeta-integrals from the layer's states."""
    return zeta_cumulative(layer.rho, layer.m, layer.level, layer.grid, gp)


def init_layer(u0: Callable, grid: Grid, gp: GasParams,
               subsamples: int = 8) -> Layer:
    """Cell averages of the initial field sampler on level 0.

    ``u0`` maps an array of positions to (rho, m) arrays.  Averages use
    composite midpoints, ``subsamples`` points per cell (minimum 8).
    A warning is emitted when the averaged data already sticks out of the
    initial band +-band_scale + I.
    """
    if subsamples < 8:
        subsamples = 8
    idx = stagger(0, grid)
    left = grid.x[idx] - grid.dx
    offsets = (np.arange(subsamples) + 0.5) * (2.0 * grid.dx / subsamples)
    pts = left[:, None] + offsets[None, :]
    rho_s, m_s = u0(pts.ravel())
    rho_s = np.asarray(rho_s, dtype=float).reshape(pts.shape)
    m_s = np.asarray(m_s, dtype=float).reshape(pts.shape)
    if np.any(rho_s < 0):
        bad = pts.ravel()[np.argmin(rho_s.ravel())]
        raise ConfigurationError(f"negative density sample near x={bad:.6g}")
    rho = rho_s.mean(axis=1)
    m = m_s.mean(axis=1)
    m = np.where(rho > 0, m, 0.0)
    i_vals = zeta_cumulative(rho, m, 0, grid, gp)
    z, w = to_invariants(rho, m, gp)
    slack = 1e-9
    worst = max(np.max((-gp.band_scale + i_vals) - z, initial=-np.inf),
                np.max(w - (gp.band_scale + i_vals), initial=-np.inf))
    if worst > slack:
        import warnings
        warnings.warn(
            f"initial data leaves the +-band_scale band by {worst:.3g}; "
            "the cutoff will trim it on the first step", UserWarning,
            stacklevel=2)
    return Layer(level=0, rho=rho, m=m, i_vals=i_vals, l_val=0.0, grid=grid)


def source_terms(layer: Layer, forcing: Forcing, gp: GasParams) -> SourceTerms:
    """R, S, G, H and xi at every active node of the layer's level.

    The force moment at node j sums F(x_{k+1}, t_n) * xi_k over the node
    pairs (k, k+2) lying entirely to the left of j, i.e. it is a prefix
    sum of the per-pair moments.  Vacuum nodes contribute zeros
    throughout so the downstream update never sees a 1/rho**theta from an
    empty cell.
    """
    grid = layer.grid
    idx = layer.indices
    t_n = layer.level * grid.dt
    rho, m = layer.rho, layer.m
    vac = rho <= 0.0
    flux2 = momentum_flux(rho, m, gp)

    xi = np.zeros_like(rho)
    if len(idx) > 1:
        xi[:-1] = ((m[1:] + m[:-1]) * grid.dx
                   - (2.0 * grid.dt / 3.0) * (flux2[1:] - flux2[:-1]))
        xi[:-1] = np.where(vac[:-1], 0.0, xi[:-1])

    f_moment = np.zeros_like(rho)
    if len(idx) > 1:
        f_mid = forcing(grid.x[idx[:-1] + 1], t_n)
        f_moment[1:] = np.cumsum(f_mid * xi[:-1])

    f_here = forcing(grid.x[idx], t_n)
    g1, g2 = g_source(rho, m, f_here, f_moment, gp)
    g1 = np.where(vac, 0.0, g1)
    g2 = np.where(vac, 0.0, g2)

    th = gp.theta
    safe_pow = np.where(vac, 1.0, rho) ** th
    over_c = np.where(vac, 0.0, m / safe_pow)
    pref = grid.dt ** 2 / (8.0 * grid.dx)
    R = pref * (rho * (g2 + g1) + over_c * (g2 - g1))
    v = velocity(rho, m)
    heavy = np.where(vac, 0.0,
                     (rho * v * v + rho ** gp.gamma) / safe_pow)
    S = (grid.dx / 4.0 * rho * zeta(rho, m, gp)
         + pref * (2.0 * rho * (g2 + g1 + 2.0 * v_flux(rho, m, gp))
                   + heavy * (g2 - g1) - 2.0 * m))
    R = np.where(vac, 0.0, R)
    S = np.where(vac, 0.0, S)
    return SourceTerms(R=R, S=S, G=g1, H=g2, xi=xi)


def cutoff(rho, m, lo, hi, vac_thresh, gp: GasParams):
    """Push averaged states back into the band [lo, hi] in (z, w).

    Densities below ``vac_thresh`` become exact vacuum before any
    characteristic transform is attempted.  States whose invariants stay
    inside the band are passed through bit-for-bit; clamped states are
    rebuilt from the clipped invariants, and a clamp so severe that the
    clipped pair degenerates (w' < z') also ends in vacuum.
    """
    rho = np.asarray(rho, dtype=float)
    m = np.asarray(m, dtype=float)
    if np.any(lo > hi):
        j = int(np.argmax(lo - hi))
        raise BandCollapseError(
            f"band collapsed at node slot {j}: lo={lo[j]:.6g} > hi={hi[j]:.6g}; "
            "parameters are outside the regime the band analysis covers")
    vac = rho < vac_thresh
    rho_safe = np.where(vac, 1.0, rho)
    z, w = to_invariants(rho_safe, np.where(vac, 0.0, m), gp)
    z2 = np.maximum(z, lo)
    w2 = np.minimum(w, hi)
    dead = vac | (w2 < z2)
    changed = ((z2 != z) | (w2 != w)) & ~dead
    if np.any(changed):
        rho_c, m_c = from_invariants(np.where(changed, z2, 0.0),
                                     np.where(changed, w2, 1.0), gp)
        rho = np.where(changed, rho_c, rho)
        m = np.where(changed, m_c, m)
    rho = np.where(dead, 0.0, rho)
    m = np.where(dead, 0.0, m)
    return rho, m


def step(layer: Layer, forcing: Forcing, gp: GasParams,
         no_cutoff: bool = False, freeze_l: bool = False) -> Layer:
    """Advance one staggered half-step, returning the next level's layer.

    Interior nodes of the new level follow the averaged recurrence; wall
    nodes (present on odd levels) are closed by reflecting the inner
    neighbour with negated momentum and mirrored source terms, which pins
    m = 0 at the walls and telescopes total mass exactly.  Stepping off
    an odd level, the wall nodes' R is dropped (no mass correction may
    cross a wall) for the same reason.  With ``no_cutoff`` the band clamp
    and the vacuum floor are both skipped (diagnostic mode); ``freeze_l``
    keeps the accumulated L at its current value while still reporting
    the per-step increment.
    """
    grid = layer.grid
    n = layer.level
    if n >= 2 * grid.n_t:
        raise ValueError(f"cannot step past the period end (level {n})")
    dt, dx = grid.dt, grid.dx
    lam = dt / (2.0 * dx)
    t_n = n * dt
    rho, m = layer.rho, layer.m
    st = source_terms(layer, forcing, gp)
    flux2 = momentum_flux(rho, m, gp)
    new_idx = stagger(n + 1, grid)

    if n % 2 == 0:
        # N_x interior sources feed N_x + 1 nodes including both walls.
        rho_new = np.empty(len(new_idx))
        m_new = np.empty(len(new_idx))
        x_int = grid.x[new_idx[1:-1]]
        f_int = forcing(x_int, t_n)
        rho_new[1:-1] = (0.5 * (rho[1:] + rho[:-1]) - lam * (m[1:] - m[:-1])
                         - st.R[1:] + st.R[:-1])
        m_new[1:-1] = (0.5 * (m[1:] + m[:-1]) - lam * (flux2[1:] - flux2[:-1])
                       - st.S[1:] + st.S[:-1]
                       - dt * 0.5 * (rho[1:] + rho[:-1]) * f_int)
        # ghost mirror: state (rho_nb, -m_nb) with the two characteristic
        # sources swapped and negated, hence R_ghost = -R_nb exactly
        rho_new[0] = rho[0] - (dt / dx) * m[0] - 2.0 * st.R[0]
        rho_new[-1] = rho[-1] + (dt / dx) * m[-1] + 2.0 * st.R[-1]
        m_new[0] = 0.0
        m_new[-1] = 0.0
    else:
        r_mod = st.R.copy()
        r_mod[0] = 0.0
        r_mod[-1] = 0.0
        x_int = grid.x[new_idx]
        f_int = forcing(x_int, t_n)
        rho_new = (0.5 * (rho[1:] + rho[:-1]) - lam * (m[1:] - m[:-1])
                   - r_mod[1:] + r_mod[:-1])
        m_new = (0.5 * (m[1:] + m[:-1]) - lam * (flux2[1:] - flux2[:-1])
                 - st.S[1:] + st.S[:-1]
                 - dt * 0.5 * (rho[1:] + rho[:-1]) * f_int)

    if (not np.all(np.isfinite(rho_new)) or not np.all(np.isfinite(m_new))
            or np.any(np.abs(rho_new) > RHO_BLOWUP)
            or (no_cutoff and np.any(rho_new < 0.0))):
        raise InstabilityError(
            f"unphysical state (negative, non-finite, or blown-up density) "
            f"entering level {n + 1}; the mesh ratio "
            f"dx/dt={grid.ratio:.0f} bounds wave speeds by the same "
            "number — faster waves (or runaway forcing) violate the CFL "
            "premise of the averaging")

    l_inc = diagnostics.entropy_production(layer, (rho_new, m_new), gp)
    new_l = layer.l_val if freeze_l else layer.l_val + l_inc

    i_raw = zeta_cumulative(np.maximum(rho_new, 0.0), m_new, n + 1, grid, gp)
    m_band = diagnostics.m_sequence(n + 1, grid, gp)
    lo = -m_band - new_l + i_raw
    hi = m_band + new_l + i_raw
    if no_cutoff:
        rho_f, m_f = rho_new, m_new
    else:
        rho_f, m_f = cutoff(rho_new, m_new, lo, hi,
                            dx ** vacuum_exponent(gp), gp)
        if n % 2 == 0:
            # clamping must not reintroduce wall momentum
            m_f[0] = 0.0
            m_f[-1] = 0.0
    i_vals = zeta_cumulative(rho_f, m_f, n + 1, grid, gp)
    return Layer(level=n + 1, rho=rho_f, m=m_f, i_vals=i_vals, l_val=new_l,
                 grid=grid, band_lo=lo, band_hi=hi, l_increment=l_inc)


def run_period(layer0: Layer, forcing: Forcing, gp: GasParams,
               no_cutoff: bool = False, freeze_l: bool = False,
               on_layer: Optional[Callable[[Layer], None]] = None):
    """March one full forcing period (2*n_t steps) from a level-0 layer.

    Returns (final_layer, records) where records holds one diagnostics
    entry per level, level 0 included.  ``on_layer`` (if given) receives
    every layer as it is produced, the initial one first.
    """
    if layer0.level != 0:
        raise ValueError("run_period starts from a level-0 layer")
    grid = layer0.grid
    if grid.n_t < 1:
        raise ConfigurationError("grid has no time steps")
    layer = layer0
    records = [diagnostics.record_for(layer, gp)]
    if on_layer is not None:
        on_layer(layer)
    for _ in range(2 * grid.n_t):
        layer = step(layer, forcing, gp, no_cutoff=no_cutoff,
                     freeze_l=freeze_l)
        records.append(diagnostics.record_for(layer, gp))
        if on_layer is not None:
            on_layer(layer)
    return layer, records
