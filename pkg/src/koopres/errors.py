"""Exception types raised across the package."""


class KoopresError(Exception):
    """Base class for all package errors."""


class ChartMismatchError(KoopresError, ValueError):
    """Operands live on different coordinate charts."""


class UnknownCoordinateError(KoopresError, KeyError):
    """A coordinate name is not part of the chart."""

    def __str__(self):
        return str(self.args[0]) if self.args else "unknown coordinate"


class NonAffineMapError(KoopresError, ValueError):
    """A chart map image has degree greater than one."""


class SingularMapError(KoopresError, ValueError):
    """A linear chart map cannot be inverted."""


class DivergentPairingError(KoopresError, ValueError):
    """A weighted inner product does not converge."""


class DegreeChangingError(KoopresError, ValueError):
    """An operator does not preserve total polynomial degree.

    ``monomial`` names the offending basis element and ``image_degree`` the
    degree it is mapped to.
    """

    def __init__(self, message, monomial=None, image_degree=None):
        super().__init__(message)
        self.monomial = monomial
        self.image_degree = image_degree


class EigensolverError(KoopresError, RuntimeError):
    """Dense eigensolver failed on one degree block."""

    def __init__(self, message, block=None):
        super().__init__(message)
        self.block = block


class ChartDomainError(KoopresError, ValueError):
    """Sample points fall outside the valid domain of a coordinate chart."""


class PolynomialParseError(KoopresError, ValueError):
    """Inline polynomial text could not be parsed."""

    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


class QuadratureDomainError(KoopresError, ValueError):
    """A quadrature grid does not cover the integrand's support."""

    def __init__(self, message, suggested_scale=None):
        super().__init__(message)
        self.suggested_scale = suggested_scale


class IllConditionedDictionaryError(KoopresError, ValueError):
    """Gram matrix of a dictionary is too badly conditioned for a fit."""

    def __init__(self, message, condition_number):
        super().__init__(message)
        self.condition_number = condition_number


class UnknownPresetError(KoopresError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown preset"
