"""Wave curves, shock speeds, and cell Riemann problems.

The scheme itself never solves Riemann problems — the staggered averaging
sidesteps them — but the analysis of the scheme rests on classifying the
local wave pattern between neighbouring states and on replacing smooth
rarefactions by staircases of small jumps.  This module provides those
pieces: middle-state solves on the wave curves, the discrete rarefaction
fan, shock speeds, and Rankine-Hugoniot residuals for verification.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigurationError
from .gas import GasParams, eigenvalues, momentum_flux, pressure, to_invariants, velocity


class VacuumFormation(RuntimeError):
    """The wave curves meet at or below zero density (diverging data)."""


@dataclass(frozen=True)
class FanParams:
    """Exponents controlling the rarefaction staircase.

    ``alpha_fan`` sets the jump size dx**alpha_fan between fan states;
    ``beta_fan`` enters only through the admissibility constraints that
    keep the staircase consistent with the scheme's error budget.
    """

    alpha_fan: float = 0.75
    beta_fan: float = 0.1


def validate_fan_params(fp: FanParams, gp: GasParams) -> None:
    a, b = fp.alpha_fan, fp.beta_fan
    g = gp.gamma
    problems = []
    if not 0.5 < a < 1.0:
        problems.append(f"alpha_fan={a} outside (1/2, 1)")
    if b <= 0 or b >= a:
        problems.append(f"beta_fan={b} must lie in (0, alpha_fan)")
    if not 0.5 + b / 2.0 < a:
        problems.append(f"alpha_fan={a} <= 1/2 + beta_fan/2")
    if not a < 1.0 - 2.0 * b:
        problems.append(f"alpha_fan={a} >= 1 - 2*beta_fan")
    if not b < 2.0 / (g + 5.0):
        problems.append(f"beta_fan={b} >= 2/(gamma+5)")
    if not (9.0 - 3.0 * g) * b / 2.0 < a:
        problems.append(f"(9-3*gamma)*beta_fan/2 >= alpha_fan")
    if problems:
        raise ConfigurationError("; ".join(problems))


@dataclass(frozen=True)
class RiemannFan:
    """Discretized 1-rarefaction: p constant states and p-1 edge speeds."""

    states: np.ndarray       # shape (p, 2): rows (z_i, w_i), w_i all equal
    speeds: np.ndarray       # shape (p-1,): left-family edge speeds, increasing
    p: int
    shock: Optional[tuple] = None   # (sigma, (rho_m, m_m)) when paired with a shock


def shock_speed_S(rho, rho0, gp: GasParams):
    """Speed magnitude sqrt(rho*(p(rho)-p(rho0)) / (rho0*(rho-rho0))).

    Continuous limit rho -> rho0 gives the sound speed rho0**theta.  The
    formula is symmetric enough to be used on either side of rho0 (the
    quotient stays positive for rho != rho0 by monotonicity of p).
    """
    rho = np.asarray(rho, dtype=float)
    rho0 = np.asarray(rho0, dtype=float)
    if np.any(rho0 <= 0):
        raise ValueError("reference density must be positive")
    if np.any(rho < 0):
        raise ValueError("negative density")
    equal = rho == rho0
    rho_safe = np.where(equal, rho0 + 1.0, rho)
    ratio = (rho_safe * (pressure(rho_safe, gp) - pressure(rho0, gp))
             / (rho0 * (rho_safe - rho0)))
    return np.where(equal, rho0 ** gp.theta, np.sqrt(ratio))


def _phi(rho, rho0, gp):
    # velocity drop across a shock connecting densities rho0 -> rho
    return np.sqrt((pressure(rho, gp) - pressure(rho0, gp))
                   * (rho - rho0) / (rho * rho0))


def _curve1_v(rho, rho_l, v_l, gp):
    """Velocity on the 1-wave locus through (rho_l, v_l), as a function of rho."""
    th = gp.theta
    if rho <= rho_l:
        return v_l + (rho_l ** th - rho ** th) / th
    return v_l - _phi(rho, rho_l, gp)


def _curve2_v(rho, rho_r, v_r, gp):
    """Velocity on the 2-wave locus through (rho_r, v_r)."""
    th = gp.theta
    if rho <= rho_r:
        return v_r - (rho_r ** th - rho ** th) / th
    return v_r + _phi(rho, rho_r, gp)


def _curve1_dv(rho, rho_l, gp):
    th = gp.theta
    if rho <= rho_l or rho - rho_l < 1e-9 * rho_l:
        return -rho ** (th - 1.0)
    a = pressure(rho, gp) - pressure(rho_l, gp)
    b = rho - rho_l
    c = rho * rho_l
    d_ab_c = (rho ** (gp.gamma - 1.0) * b + a) / c - a * b * rho_l / (c * c)
    return -d_ab_c / (2.0 * _phi(rho, rho_l, gp))


def _curve2_dv(rho, rho_r, gp):
    return -_curve1_dv(rho, rho_r, gp)


def solve_middle(rho_l, m_l, rho_r, m_r, gp: GasParams):
    """Middle state of the Riemann problem (uL | uR).

    Finds the density where the 1-wave curve through uL meets the 2-wave
    curve through uR, by a bracketed Newton iteration (analytic slope,
    bisection step whenever Newton leaves the bracket), tolerance 1e-12,
    at most 50 iterations.  Returns ((rho_m, m_m), case) with case one of
    R1R2, R1S2, S1R2, S1S2; zero-strength waves count as rarefactions.

    Raises :class:`VacuumFormation` when the curves only meet at or below
    zero density (strongly diverging data); callers fall back to the
    vacuum policy of the scheme.
    """
    rho_l, m_l = float(rho_l), float(m_l)
    rho_r, m_r = float(rho_r), float(m_r)
    if rho_l <= 0 or rho_r <= 0:
        raise ValueError("solve_middle requires non-vacuum input states")
    v_l, v_r = m_l / rho_l, m_r / rho_r
    th = gp.theta
    w_l = v_l + rho_l ** th / th
    z_r = v_r - rho_r ** th / th
    if w_l <= z_r:
        raise VacuumFormation(
            f"wave curves meet below vacuum (w_L={w_l:.6g} <= z_R={z_r:.6g})")

    def mismatch(r):
        return _curve1_v(r, rho_l, v_l, gp) - _curve2_v(r, rho_r, v_r, gp)

    # Bracket: mismatch > 0 near vacuum (guaranteed by w_l > z_r), < 0 for
    # large enough density since both shock branches grow without bound.
    lo = 0.0
    hi = max(rho_l, rho_r)
    while mismatch(hi) > 0.0:
        hi *= 2.0
        if hi > 1e12:          # pragma: no cover - unreachable for physical data
            raise RuntimeError("failed to bracket the middle state")

    # two-rarefaction intersection as the initial guess
    r = (th * (w_l - z_r) / 2.0) ** (1.0 / th)
    r = min(max(r, 1e-300), hi)
    for _ in range(50):
        f = mismatch(r)
        if f > 0.0:
            lo = r
        else:
            hi = r
        df = _curve1_dv(r, rho_l, gp) - _curve2_dv(r, rho_r, gp)
        step_ok = df != 0.0 and np.isfinite(df)
        if step_ok:
            r_new = r - f / df
            step_ok = lo < r_new < hi
        if not step_ok:
            r_new = 0.5 * (lo + hi)
        if abs(r_new - r) <= 1e-12 * max(1.0, r):
            r = r_new
            break
        r = r_new

    v_m = _curve1_v(r, rho_l, v_l, gp)
    case = ("R" if r <= rho_l else "S") + "1" + \
           ("R" if r <= rho_r else "S") + "2"
    return (r, r * v_m), case


def classify(rho_l, m_l, rho_r, m_r, gp: GasParams) -> str:
    """Wave pattern of the Riemann problem: R1R2, R1S2, S1R2 or S1S2."""
    _, case = solve_middle(rho_l, m_l, rho_r, m_r, gp)
    return case


def build_fan(rho_l, m_l, z_m, dx, fp: FanParams, gp: GasParams) -> RiemannFan:
    """Staircase approximation of the 1-rarefaction from uL down to z = z_m.

    p = max(floor((z_m - z_l)/dx**alpha_fan) + 1, 2) constant states with
    the left invariant stepped by dx**alpha_fan (the final partial step
    closes the gap) and the right invariant frozen at w_L.  Edge speeds
    use the two-density speed function between consecutive states and are
    strictly increasing; the degenerate fan (z_m = z_l) collapses to the
    left wave speed of uL.
    """
    if rho_l <= 0:
        raise ValueError("fan requires a non-vacuum left state")
    z_l, w_l = (float(t) for t in to_invariants(rho_l, m_l, gp))
    z_m = float(z_m)
    if z_m < z_l - 1e-14:
        raise ValueError(f"fan orientation: z_m={z_m:.6g} < z_l={z_l:.6g}")
    z_m = max(z_m, z_l)
    h = dx ** fp.alpha_fan
    p = max(int(np.floor((z_m - z_l) / h)) + 1, 2)
    zs = np.empty(p)
    zs[: p - 1] = z_l + h * np.arange(p - 1)
    zs[-1] = z_m
    ws = np.full(p, w_l)
    th = gp.theta
    rhos = (th * (ws - zs) / 2.0) ** (1.0 / th)
    vs = (ws + zs) / 2.0
    speeds = vs[:-1] - shock_speed_S(rhos[1:], rhos[:-1], gp)
    return RiemannFan(states=np.column_stack([zs, ws]), speeds=speeds, p=p)


def rh_residual(sigma, rho_l, m_l, rho_r, m_r, gp: GasParams) -> np.ndarray:
    """Jump-condition defect f(uR) - f(uL) - sigma*(uR - uL), two components."""
    for rho, m in ((rho_l, m_l), (rho_r, m_r)):
        if rho == 0 and m != 0:
            raise ValueError("vacuum state with nonzero momentum")
    f_l = np.array([m_l, float(momentum_flux(rho_l, m_l, gp))])
    f_r = np.array([m_r, float(momentum_flux(rho_r, m_r, gp))])
    jump = np.array([rho_r - rho_l, m_r - m_l])
    return f_r - f_l - sigma * jump


def wave_speeds(rho_l, m_l, rho_r, m_r, gp: GasParams):
    """Outer edge speeds (sigma1, sigma2) of the solved Riemann problem.

    Shock speeds come from the two-density speed function; rarefaction
    edges move with the corresponding characteristic speed of the adjacent
    constant state.
    """
    (rho_m, m_m), case = solve_middle(rho_l, m_l, rho_r, m_r, gp)
    v_l, v_r = velocity(rho_l, m_l), velocity(rho_r, m_r)
    if case[0] == "S":
        sigma1 = v_l - float(shock_speed_S(rho_m, rho_l, gp))
    else:
        sigma1 = float(eigenvalues(rho_l, m_l, gp)[0])
    if case[2] == "S":
        sigma2 = v_r + float(shock_speed_S(rho_m, rho_r, gp))
    else:
        sigma2 = float(eigenvalues(rho_r, m_r, gp)[1])
    return sigma1, sigma2, (rho_m, m_m), case
