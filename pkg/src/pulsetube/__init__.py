"""Time-periodic solutions of forced isentropic gas flow in a closed tube.

A staggered, entropy-budgeted finite-volume scheme on [0, 1] with
reflecting walls, plus a damped fixed-point driver that turns the
one-period evolution into a periodic-orbit finder.
"""
from .config import Assembled, RunConfig, assemble, parse_config
from .diagnostics import (BandReport, DiagnosticsRecord, band_check,
                          boundary_compat, c_gamma, decay_estimate_check,
                          entropy_production, m_sequence, mass_energy,
                          record_for, regime_split_density)
from .errors import (BandCollapseError, ConfigurationError, DecodeError,
                     InstabilityError)
from .gas import (GasParams, eigenvalues, entropy_gradient, entropy_pair,
                  from_invariants, g_source, make_params, momentum_flux,
                  pressure, to_invariants, v_flux, velocity, zeta)
from .grid import (Forcing, Grid, build_grid, builtin_forcing, cell_widths,
                   stagger)
from .period_map import FixedPointReport, apply_F, decode, encode, fixed_point
from .riemann import (FanParams, RiemannFan, VacuumFormation, build_fan,
                      classify, rh_residual, shock_speed_S, solve_middle,
                      validate_fan_params, wave_speeds)
from .scheme import (Layer, SourceTerms, cutoff, functional_I, init_layer,
                     run_period, source_terms, step, vacuum_exponent,
                     zeta_cumulative)

__version__ = "0.1.0"

__all__ = [
    "Assembled", "BandCollapseError", "BandReport", "ConfigurationError",
    "DecodeError", "DiagnosticsRecord", "FanParams", "FixedPointReport",
    "Forcing", "GasParams", "Grid", "InstabilityError", "Layer", "RunConfig",
    "RiemannFan", "SourceTerms", "VacuumFormation", "apply_F", "assemble",
    "band_check", "boundary_compat", "build_fan", "build_grid",
    "builtin_forcing", "c_gamma", "cell_widths", "classify", "cutoff",
    "decay_estimate_check", "decode", "eigenvalues", "encode",
    "entropy_gradient", "entropy_pair", "entropy_production", "fixed_point",
    "from_invariants", "functional_I", "g_source", "init_layer", "m_sequence",
    "make_params", "mass_energy", "momentum_flux", "parse_config", "pressure",
    "record_for", "regime_split_density", "rh_residual", "run_period",
    "shock_speed_S", "solve_middle", "source_terms", "stagger", "step",
    "to_invariants", "v_flux", "vacuum_exponent", "validate_fan_params",
    "velocity", "wave_speeds", "zeta", "zeta_cumulative",
]
