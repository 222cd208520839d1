"""Typed errors shared across the package."""


class SsnetError(Exception):
    """Base class for all package errors."""


class DatasetError(SsnetError):
    """A dataset invariant is violated."""


class DimensionMismatch(DatasetError):
    pass


class NonFiniteData(DatasetError):
    pass


class TooFewObservations(DatasetError):
    pass


class BadLabel(DatasetError):
    """Response values outside the family's label alphabet."""


class BadStandardization(DatasetError):
    """Declared column scaling does not match the actual column norms."""


class ZeroColumn(DatasetError):
    """A design column has (numerically) zero norm and cannot be scaled."""

    def __init__(self, column: int):
        self.column = column
        super().__init__(f"column {column} has norm below 1e-12")


class RankDeficient(SsnetError):
    """A design submatrix does not have full column rank."""

    def __init__(self, support):
        self.support = support
        super().__init__(f"design submatrix for support {tuple(support)} is rank deficient")


class NotConverged(SsnetError):
    """A solver hit its iteration budget; carries the best iterate."""

    def __init__(self, message, fit=None):
        self.fit = fit
        super().__init__(message)


class TooLargeT(SsnetError):
    """True-support size exceeds the subset-enumeration budget."""


class MissingParameter(SsnetError):
    pass


class MissingConstant(SsnetError):
    pass
