"""Exception types shared across the package."""


class TwoForestError(Exception):
    """Base class for all package errors."""


class GraphInputError(TwoForestError):
    """Invalid graph construction input."""


class DisconnectedGraph(GraphInputError):
    pass


class NonpositiveConductance(GraphInputError):
    pass


class SelfLoop(GraphInputError):
    pass


class InvalidBoundary(GraphInputError):
    pass


class InvalidVertex(GraphInputError):
    pass


class UnknownEdge(GraphInputError):
    pass


class NumericalError(TwoForestError):
    """Factorization or solve failed, or a residual check tripped."""


class SingularMatrix(NumericalError):
    pass


class DivergentIntegral(NumericalError):
    pass


class TooLarge(TwoForestError):
    """Exact enumeration requested beyond the hard edge-count cap."""


class UnknownStatistic(TwoForestError):
    pass


class UnsupportedFamily(TwoForestError):
    pass


class NonPlanarMap(TwoForestError):
    """Rotation system fails the Euler / face-walk consistency check."""


class BijectionViolation(TwoForestError):
    """Forest-to-unicycle transport produced a structurally invalid result."""


class PointOnBoundary(TwoForestError):
    pass
