"""Exception hierarchy shared by every module in the package."""


class ProtoGeomError(ValueError):
    """Base class for all package errors."""


class DimensionError(ProtoGeomError):
    pass


class NotPSDError(ProtoGeomError):
    pass


class RankError(ProtoGeomError):
    pass


class DiagonalError(ProtoGeomError):
    pass


class DegenerateError(ProtoGeomError):
    pass


class DomainError(ProtoGeomError):
    pass


class ConfigError(ProtoGeomError):
    pass


class EmptyAnchorError(ProtoGeomError):
    """No anchor in the batch has a positive partner."""


class MismatchError(ProtoGeomError):
    pass


class EmptyClassError(ProtoGeomError):
    pass


class NumericalError(ProtoGeomError, ArithmeticError):
    """Non-finite values encountered during optimization."""
