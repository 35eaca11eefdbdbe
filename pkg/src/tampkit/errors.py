"""Exception types shared across the toolkit."""


class TampkitError(Exception):
    """Base class for all toolkit errors."""


class PddlSyntaxError(TampkitError):
    """Malformed domain/problem text.

    Attributes:
        pos: character offset into the source text.
        expected: description of what the parser was looking for.
    """

    def __init__(self, message, pos, expected=None):
        detail = f"{message} at offset {pos}"
        if expected is not None:
            detail += f" (expected {expected})"
        super().__init__(detail)
        self.pos = pos
        self.expected = expected


class UnsupportedConstruct(TampkitError):
    """A PDDL construct outside the supported STRIPS subset."""

    def __init__(self, construct, pos):
        super().__init__(f"unsupported construct '{construct}' at offset {pos}")
        self.construct = construct
        self.pos = pos


class UnknownPredicate(TampkitError):
    pass


class UnknownEntity(TampkitError):
    pass


class ArityMismatch(TampkitError):
    pass


class NotApplicable(TampkitError):
    """Action preconditions do not hold in the given state."""


class EmptyGoal(TampkitError):
    pass


class DimensionMismatch(TampkitError):
    pass


class SingularContactInertia(TampkitError):
    """Contact-space inverse inertia is numerically singular (degenerate geometry)."""


class NotConverged(TampkitError):
    """Trajectory solver made no progress; the caller treats the edge as infeasible."""


class NonFiniteCost(TampkitError):
    pass


class Infeasible(TampkitError):
    """Constraint refinement stalled above tolerance; try the next-best plan."""


class NoSolution(TampkitError):
    """Search frontier exhausted without a refinable plan."""

    def __init__(self, message, subtask_id=None):
        super().__init__(message)
        self.subtask_id = subtask_id


class NoBallisticSolution(TampkitError):
    """No release state reaches the target under the velocity limits."""


class PushTargetInvalid(TampkitError):
    pass


class UnknownAction(TampkitError):
    pass


class ScenarioError(TampkitError):
    """Invalid or missing scenario input."""
