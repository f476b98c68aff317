from typing import Any, Optional


class BakerDimError(Exception):
    """base class for every error raised by bakerdim"""


class ParameterError(BakerDimError, ValueError):
    """a constructor or operation received a value outside its domain"""


class SlabEscapeError(BakerDimError, ValueError):
    """
    raised when an inverse baker step leaves the invertibility slab

    Attributes:
        index: number of inverse steps that succeeded before the escape
        partial: the PastHistory built up to the failing step
    """

    def __init__(self, message: str, index: int, partial: Optional[Any] = None) -> None:
        super().__init__(message)
        self.index: int = index
        self.partial = partial


class BranchBoundaryError(BakerDimError, ValueError):
    """the jacobian was requested on a branch boundary (x or z equal to 1/2)"""


class DegenerateGridError(BakerDimError, ValueError):
    """grid side too small relative to the data diameter"""


class EstimationError(BakerDimError):
    """a dimension fit could not be carried out"""


class ConfigError(BakerDimError, ValueError):
    """invalid experiment configuration"""


class TelescopingError(BakerDimError):
    """the cohomologous-coupling certificate failed"""
