"""Exception hierarchy.  All errors are ``ValueError`` subclasses."""


class GeometryError(ValueError):
    pass


class DegenerateBodyError(GeometryError):
    pass


class EmptySectionError(GeometryError):
    pass


class DensityOutOfRangeError(GeometryError):
    pass


class DegenerateBuoyancyLineError(GeometryError):
    pass


class CurvatureUndefinedError(GeometryError):
    pass


class SymmetryRequiredError(GeometryError):
    pass
