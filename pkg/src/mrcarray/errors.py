"""Exception hierarchy.

Validation errors subclass :class:`ValueError`; numerical failures subclass
:class:`NumericalError`. The CLI maps the two families to distinct exit codes.
"""


class ArrayValidationError(ValueError):
    """An array model violates a physical invariant."""


class NonSymmetricCoupling(ArrayValidationError):
    pass


class DiagonalNotUnity(ArrayValidationError):
    pass


class CouplingOutOfRange(ArrayValidationError):
    pass


class NotPositiveDefinite(ArrayValidationError):
    pass


class DimensionMismatch(ArrayValidationError):
    pass


class NonPositiveComponent(ArrayValidationError):
    pass


class KOutOfRange(ArrayValidationError):
    """Scalar coupling coefficient outside [0, 1)."""


class EmptySpectrum(ValueError):
    """Spectrum too short (or entirely singular) for peak detection."""


class NumericalError(ArithmeticError):
    """Base class for failures of a numerical procedure on valid input."""


class SingularCoupling(NumericalError):
    pass


class SingularAtFrequency(NumericalError):
    def __init__(self, message, omega=None):
        super().__init__(message)
        self.omega = omega


class UnmatchedPeak(NumericalError):
    pass


class NoBracket(NumericalError):
    def __init__(self, message, k_values=None, residuals=None):
        super().__init__(message)
        self.k_values = k_values
        self.residuals = residuals
