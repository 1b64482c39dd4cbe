"""Exception types raised by the package."""


class ShapeError(ValueError):
    """Base class for all domain errors."""


class AllLandmarksCoincide(ShapeError):
    pass


class ZeroNorm(ShapeError):
    pass


class AlignmentUndefined(ShapeError):
    """Optimal rotation is arbitrary: the two pre-shapes are complex-orthogonal."""


class DegenerateMean(ShapeError):
    pass


class DegenerateDirection(ShapeError):
    pass


class NonUniqueFoot(ShapeError):
    pass


class IdenticalShapes(ShapeError):
    pass


class AntipodalShapes(ShapeError):
    pass


class DegenerateProjection(ShapeError):
    pass


class InsufficientSamples(ShapeError):
    pass


class InsufficientObservations(ShapeError):
    pass


class SingularCovariance(ShapeError):
    pass


class ZeroVariance(ShapeError):
    pass


class MeanAmbiguous(ShapeError):
    pass


class ParseError(ShapeError):
    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column


class SchemaError(ShapeError):
    pass


class ConfigError(ShapeError):
    def __init__(self, message, key=None):
        super().__init__(message if key is None else f"{message}: {key!r}")
        self.key = key


# a data row whose landmarks all coincide
DegenerateRow = AllLandmarksCoincide
