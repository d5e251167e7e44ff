"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid configuration value. ``field`` names the offending key when known."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class ParameterError(ValueError):
    """Operation argument outside its allowed domain."""


class AccuracyError(ArithmeticError):
    """Numerical quadrature cannot meet its accuracy contract."""


class StatisticalPowerError(ValueError):
    """Too few Monte Carlo trajectories for a meaningful estimate."""
