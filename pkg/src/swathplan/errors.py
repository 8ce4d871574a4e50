"""Exception hierarchy for the planner.

Every planner failure derives from :class:`PlanningError` so callers can catch
one type; the subclasses map onto the CLI exit codes.
"""


class PlanningError(Exception):
    """Base class for all planner errors."""

    exit_code = 1
    stage = None

    def with_stage(self, stage):
        self.stage = stage
        return self


class DegenerateGeometryError(PlanningError, ValueError):
    """Input geometry is collinear, too small or otherwise unusable."""


class InvalidPolygonError(PlanningError, ValueError):
    """Polygon failed construction-time validation."""


class InfeasibleWorkspaceError(PlanningError):
    """Buffering left no feasible space to plan in."""

    exit_code = 2

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class EmptyPlanError(InfeasibleWorkspaceError):
    """The feasible space is too thin to hold a single swath."""


class InfeasibleNodeError(PlanningError):
    """A query point lies outside the closure of the feasible space."""

    exit_code = 2

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class UnreachableError(PlanningError):
    """Two points lie in different connected components of the feasible space."""

    exit_code = 3

    def __init__(self, message, components=None):
        super().__init__(message)
        self.components = components


class InfeasibleInstanceError(UnreachableError):
    """Some swaths cannot be reached from the depot."""

    def __init__(self, message, stranded=()):
        super().__init__(message)
        self.stranded = tuple(stranded)


class SizeLimitError(PlanningError, ValueError):
    """Instance too large for exhaustive enumeration."""


class ScenarioError(PlanningError, ValueError):
    """Scenario file could not be parsed or validated."""

    exit_code = 4

    def __init__(self, message, feature=None):
        if feature is not None:
            message = f"feature {feature}: {message}"
        super().__init__(message)
        self.feature = feature
