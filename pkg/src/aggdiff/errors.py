"""Exception types shared across the package."""


class AggDiffError(Exception):
    """Base class for all package errors."""


class ParameterDomainError(AggDiffError, ValueError):
    """A parameter is outside its admissible range; the message names the bound."""


class ConfigError(AggDiffError, ValueError):
    """Invalid run configuration (bad key, bad value, malformed file)."""


class NumericalToleranceError(AggDiffError, RuntimeError):
    """A quadrature or root-finder failed to reach its requested tolerance."""


class InvalidCacheError(AggDiffError, RuntimeError):
    """A cached operator was applied to data from a different grid or kernel."""


class SchemeError(AggDiffError, RuntimeError):
    """Internal scheme contract violated (e.g. negative cell value); a bug."""


class BlowUpDetected(AggDiffError):
    """Terminal event: the run concentrated beyond the blow-up thresholds.

    Carries the rescaled time and peak value at detection.  This is a
    reportable outcome, not a crash.
    """

    def __init__(self, tau, max_value, reason):
        self.tau = float(tau)
        self.max_value = float(max_value)
        self.reason = reason
        super().__init__(f"blow-up at tau={tau:.6g}: {reason} (max={max_value:.6g})")
