"""Exception types raised across the package."""


class CoilsweepError(Exception):
    """Base class for all package-specific errors."""


class InvalidParameterError(CoilsweepError, ValueError):
    """A physical parameter violates its domain (non-positive coupling, zero slope, ...)."""


class UndefinedAngleError(CoilsweepError, ValueError):
    """Mixing angle requested at kappa = delta = 0 where it is undefined."""


class SingularScheduleError(CoilsweepError, ValueError):
    """Counterdiabatic terms requested at a point where delta^2 + 4*kappa^2 = 0."""


class InvalidStateError(CoilsweepError, ValueError):
    """A density matrix fails Hermiticity or positivity requirements."""


class UndefinedEfficiencyError(CoilsweepError, ValueError):
    """Efficiency denominator vanishes (all rates zero or zero state)."""


class StiffnessError(CoilsweepError, RuntimeError):
    """Adaptive step size underflowed; carries the integration time of failure."""

    def __init__(self, t: float):
        self.t = t
        super().__init__(f"step size underflow at t = {t:.6e} s")


class AccuracyError(CoilsweepError, RuntimeError):
    """An integration invariant (trace bound, positivity) broke beyond tolerance."""


class ConfigError(CoilsweepError, ValueError):
    """Configuration parsing or validation failure; message carries the field path."""
