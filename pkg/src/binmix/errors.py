"""Exception types shared across the package."""


class BinmixError(Exception):
    """Base class for all errors raised by this package."""


class InvalidCodeError(BinmixError):
    """A diagnostic code is empty or unusable after normalization."""


class EmptyDatasetError(BinmixError):
    """An operation received a dataset with no usable rows."""


class ParameterError(BinmixError):
    """An argument is outside its documented range or shape."""


class ParseError(BinmixError):
    """Record text could not be parsed."""


class RankInfeasibleError(BinmixError):
    """More components requested than the data dimensions allow."""


class RankDeficiencyError(BinmixError):
    """The second moment has lower effective rank than the requested k.

    ``achievable_rank`` carries the number of usable spectral directions.
    """

    def __init__(self, message, achievable_rank=None):
        super().__init__(message)
        self.achievable_rank = achievable_rank


class AnchorNotFoundError(BinmixError):
    """No feature yields separated eigenvalues, so no diagonalizer exists."""
