class GraftlabError(Exception):
    """Base exception for all grafting-lab errors."""

    exit_code: int = 1


class ConfigurationError(GraftlabError):
    """Raised when settings or an experiment config are invalid."""

    exit_code = 2


class InputFormatError(GraftlabError):
    """Raised when an input file is not valid JSON or violates its schema."""

    exit_code = 2


class InputNotFoundError(GraftlabError):
    """Raised when an input file does not exist."""

    exit_code = 3


class MathError(GraftlabError):
    """Base class for failures inside the numerical and geometric modules."""

    exit_code = 4


class DegenerateMatrixError(MathError):
    """Raised when a Moebius matrix has vanishing determinant."""

    pass


class GeometryError(MathError):
    """Raised when a geometric construction gets invalid input."""

    pass


class SurfaceValidationError(MathError):
    """Raised when polygons and gluings do not form a half-translation surface."""

    def __init__(self, issues: list[str]):
        self.issues = issues
        super().__init__("; ".join(issues))


class SaddleConnectionError(MathError):
    """Raised when the flow meets a saddle connection where none is allowed."""

    def __init__(self, message: str, connection):
        self.connection = connection
        super().__init__(f"{message}: {connection}")


class SwitchConditionError(MathError):
    """Raised when a weight vector does not balance at the switches."""

    pass


class InfeasibleRoundingError(MathError):
    """Raised when no positive integral weight vector exists within the deviation box."""

    pass


class IntegrationError(MathError):
    """Raised when the Schwarzian ODE cannot be integrated along a path."""

    def __init__(self, message: str, location: complex | None = None):
        self.location = location
        if location is not None:
            message = f"{message} (at z={location:.6g})"
        super().__init__(message)


class NormalizationError(MathError):
    """Raised when the Moebius normalization of a developing map fails."""

    pass


class OrientationError(MathError):
    """Raised when a mesh map reverses orientation on a cell."""

    def __init__(self, cell: tuple[int, int, int]):
        self.cell = cell
        super().__init__(f"mesh map is not orientation preserving on cell {cell}")


class BoundaryMismatchError(MathError):
    """Raised when adjacent mesh pieces do not agree on their shared edge."""

    def __init__(self, edge: tuple[int, int], deviation: float):
        self.edge = edge
        self.deviation = deviation
        super().__init__(f"boundary traces of pieces {edge} differ by {deviation:.3g}")


class SkeletonMismatchError(MathError):
    """Raised when two one-skeletons are not isomorphic."""

    pass
