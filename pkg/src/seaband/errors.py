"""Exception hierarchy shared across the package.

Grouped so the CLI can map failures onto its stable exit codes:
config problems (2), numerical divergence (3), thermal runaway or
missing thermal headroom (4), ill-posed fits (5).
"""


class SeabandError(Exception):
    """Base class for all package-specific failures."""


class ConfigError(SeabandError):
    """Rejected configuration: unknown keys, bad values, unstable filter setups."""


class EvaluationSingularityError(SeabandError):
    """Frequency response requested exactly on a pole."""


class NoBandwidthError(SeabandError):
    """Magnitude never crosses the -3 dB level inside the search domain."""


class DiscretizationSingularityError(SeabandError):
    """Bilinear transform hit a pole at s = 2/Ts."""


class ImproperTransferFunctionError(SeabandError):
    """Numerator order exceeds denominator order where a proper TF is required."""


class SingularNominalError(SeabandError):
    """Nominal response magnitude too small to normalize against."""


class ThermalRunawayError(SeabandError):
    """Copper-loss feedback has no steady state below the requested point."""


class ZeroHeadroomError(ThermalRunawayError):
    """Auxiliary inflow alone pins the winding at or above T_MAX."""


class SamplingAdequacyError(SeabandError):
    """Discrete-time step too coarse for the dynamics being tracked."""


class DivergenceError(SeabandError):
    """Integration produced non-finite state; carries the failure time."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class IllPosedFitError(SeabandError):
    """Identification problem is rank-deficient or otherwise unsolvable."""


class InsufficientDataError(IllPosedFitError):
    """Dataset violates the coverage preconditions of a fit."""


class IndeterminateBandwidthError(SeabandError):
    """Neither a -3 dB crossing nor a thermal limit exists to report."""


class NonStationaryFitWarning(UserWarning):
    """Steady-state segment of a thermal record still drifting."""
