"""Exception hierarchy shared across the package.

Two branches: :class:`DomainError` (a ``ValueError``) for arguments or data
outside an operation's domain, and :class:`NumericalError` (an
``ArithmeticError``) for computations that fail despite valid inputs.
"""


class EcfError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(EcfError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DataFormatError(DomainError):
    """Malformed numeric input; carries the offending line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class BandwidthError(DomainError):
    """A quantile-spacing bandwidth reaches outside the unit interval."""


class NumericalError(EcfError, ArithmeticError):
    """A computation failed for numerical reasons."""


class SingularityError(NumericalError):
    """The density vanishes (or is not finite) where a finite value is needed."""


class NoCrossingError(NumericalError):
    """The cross-over function has no sign change inside the bracket."""


class DensityEstimateError(NumericalError):
    """Degenerate quantile spacing prevents a density estimate."""


class DegenerateDerivativeError(NumericalError):
    """The cross-over slope vanishes, so the Newton correction is undefined."""


class QuadratureError(NumericalError):
    """Adaptive quadrature hit its recursion cap before reaching tolerance."""

    def __init__(self, message, achieved_tol=None):
        self.achieved_tol = achieved_tol
        super().__init__(message)
