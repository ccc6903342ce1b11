"""Exception types shared across the package.

The CLI maps these onto its documented exit codes, so new error classes
should subclass one of the four families below.
"""


class LlsLabError(Exception):
    """Base class for all package errors."""


class ConfigError(LlsLabError):
    """Invalid run configuration. Carries the full list of problems."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class NumericalInstabilityError(LlsLabError):
    """A time integration left its stability envelope."""


class StepInstabilityError(NumericalInstabilityError):
    """Sphere deviation before renormalization exceeded the abort threshold."""

    def __init__(self, message, time=None):
        self.time = time
        super().__init__(message)


class BlowupError(NumericalInstabilityError):
    """Solution sup-norm crossed the configured blow-up cap."""

    def __init__(self, message, time=None, sup_norm=None):
        self.time = time
        self.sup_norm = sup_norm
        super().__init__(message)


class PoleProximityError(LlsLabError):
    """Magnetization came too close to the south pole for the chart."""

    def __init__(self, message, worst_index=None, worst_value=None):
        self.worst_index = worst_index
        self.worst_value = worst_value
        super().__init__(message)


class SphereViolationError(LlsLabError):
    """A magnetization field drifted off the unit sphere beyond tolerance."""


class ResolutionError(LlsLabError):
    """Grid or time sampling too coarse for the requested operation."""


class UnsupportedExponentError(ResolutionError):
    """Requested Lebesgue exponent pair is not available on this grid."""


class RepresentationError(LlsLabError):
    """Field passed in the wrong physical/spectral representation."""


class GridMismatchError(LlsLabError):
    """Operands live on different grids."""
