"""Exception types shared across losslab."""


class LossLabError(Exception):
    """Base class for every error raised by losslab."""


class InvalidSpec(LossLabError, ValueError):
    pass


class InvalidTarget(LossLabError, ValueError):
    pass


class DimensionMismatch(LossLabError, ValueError):
    pass


class NotOneHot(LossLabError, ValueError):
    pass


class EmptyRegion(LossLabError, ValueError):
    pass


class BadShape(LossLabError, ValueError):
    pass


class EmptyBatch(LossLabError, ValueError):
    pass


class ShapeMismatch(LossLabError, ValueError):
    pass


class NonFiniteGradient(LossLabError, FloatingPointError):
    pass


class NonFiniteLoss(LossLabError, FloatingPointError):
    pass


class BadCenters(LossLabError, ValueError):
    pass


class DegenerateSplit(LossLabError, ValueError):
    pass


class ParseError(LossLabError, ValueError):
    def __init__(self, message, row=None, col=None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if col is not None:
            where.append(f"col {col}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(message + suffix)
        self.row = row
        self.col = col


class MissingColumn(ParseError):
    pass


class NonNumericFeature(ParseError):
    pass
