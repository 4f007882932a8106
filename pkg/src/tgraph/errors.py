"""Exception hierarchy shared by all tgraph modules."""


class TGraphError(Exception):
    """Base class for library errors."""


class InvalidInputError(TGraphError, ValueError):
    pass


class ParallelLinesError(TGraphError):
    pass


class DegenerateDirectionsError(TGraphError):
    pass


class NotInConeError(TGraphError):
    pass


class DegenerateTileError(TGraphError):
    pass


class InvalidTilingError(TGraphError):
    """Raised when a tiling fails validation; carries the report."""

    def __init__(self, report, message=None):
        self.report = report
        super().__init__(message or f"invalid tiling: {report.summary()}")


class UnsupportedStructureError(TGraphError):
    """A graph feature (e.g. a non-quad face) that an operation cannot handle."""


class KasteleynSignError(TGraphError):
    pass


class TooLargeError(TGraphError):
    pass


class SingularMatrixError(TGraphError):
    pass


class ShapeMismatchError(TGraphError, ValueError):
    pass


class DegenerateRotationError(TGraphError):
    pass


class DegenerateWeightError(TGraphError):
    pass


class RankDeficiencyError(TGraphError):
    pass


class AssemblyError(TGraphError):
    pass


class DegenerateGraphError(TGraphError):
    pass


class NotATilingError(TGraphError):
    def __init__(self, message, tiling=None, report=None):
        self.tiling = tiling
        self.report = report
        super().__init__(message)


class ConvergenceError(TGraphError):
    """Newton iteration did not reach the requested tolerance."""


class OutsideImageError(ConvergenceError):
    pass


class SectorBoundaryError(ConvergenceError):
    pass


class InfeasibleStartError(TGraphError):
    pass


class EmptyDocumentError(TGraphError, ValueError):
    pass
