"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A run configuration failed validation."""


class IntegrationError(RuntimeError):
    """Time integration failed (step-size underflow, solver breakdown).

    Attributes
    ----------
    time : float or None
        Time at which the integrator gave up, when known.
    """

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class NormDriftError(IntegrationError):
    """State norm drifted beyond tolerance; the integrator is misconfigured."""


class UnitarityError(RuntimeError):
    """A propagator failed its unitarity check."""
