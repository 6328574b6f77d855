"""Exception hierarchy.

Errors that the command line maps to the "numeric failure" exit code derive
from :class:`NumericFailure`; malformed body descriptions raise
:class:`InvalidBodySpec`.
"""


class HilbertGeometryError(Exception):
    """Base class for every error raised by the package."""


class DimensionMismatch(HilbertGeometryError, ValueError):
    pass


class PointOutside(HilbertGeometryError, ValueError):
    pass


class ZeroDirection(HilbertGeometryError, ValueError):
    pass


class ImproperBody(HilbertGeometryError):
    """The body contains a full line through the queried point."""


class UnboundedBody(HilbertGeometryError):
    pass


class MissingBBox(HilbertGeometryError):
    pass


class UnrepresentableImage(HilbertGeometryError):
    pass


class InvalidBodySpec(HilbertGeometryError, ValueError):
    pass


class ConfigError(HilbertGeometryError, ValueError):
    pass


class UnderSampled(ConfigError):
    pass


class RegionEscapesBody(HilbertGeometryError):
    pass


class SupportEscapesBody(HilbertGeometryError):
    pass


class VariantBodyMismatch(HilbertGeometryError):
    pass


class ZeroDenominator(HilbertGeometryError):
    pass


class NumericFailure(HilbertGeometryError):
    """Estimator could not produce a trustworthy number."""


class RejectionStall(NumericFailure):
    pass


class NonFiniteRadial(NumericFailure):
    pass


class DivergentIntegral(NumericFailure):
    pass


class DegenerateFit(NumericFailure):
    pass


class PrecisionLoss(NumericFailure):
    """Rounding of the coordinates swamps a finite-difference step."""
