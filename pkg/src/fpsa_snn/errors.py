"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, NumericalFailure -> 4.
Training that fails to converge is reported as a result, not an exception,
and exits with code 3.
"""


class ConfigError(ValueError):
    """Invalid configuration, parameter file, or precondition violation."""


class NumericalFailure(RuntimeError):
    """Integration produced non-finite state or excessive clamping."""


class ClampLimitExceeded(NumericalFailure):
    """Too many integration steps pushed a state component below zero.

    Systematic clamping signals a step too large for the operating point,
    or a drive that pins a carrier density at its floor.
    """


class CalibrationError(RuntimeError):
    """A calibration search was given a range that does not bracket its target."""
