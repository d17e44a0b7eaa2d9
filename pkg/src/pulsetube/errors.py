"""Exception types shared across the solver."""


class ConfigurationError(ValueError):
    """Invalid or contradictory configuration (bad gamma, grid too fine, ...)."""


class InstabilityError(RuntimeError):
    """The time stepper produced non-finite or absurd states; run aborted."""


class BandCollapseError(RuntimeError):
    """The invariant-region band degenerated (lower edge above upper edge)."""


class DecodeError(RuntimeError):
    """Map-point decoding failed to reach a self-consistent state field."""
