"""Exception types raised across the package."""


class InterlabError(Exception):
    """Base class for every error raised by interlab."""


class CapacityExceeded(InterlabError):
    pass


class LabelError(InterlabError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class UnknownLabel(LabelError):
    pass


class KindError(InterlabError, ValueError):
    pass


class GeometryError(InterlabError, ValueError):
    pass


class SpaceError(InterlabError, ValueError):
    pass


class LocalityError(InterlabError, ValueError):
    pass


class IncompleteTable(InterlabError, ValueError):
    pass


class DomainError(InterlabError, ValueError):
    pass


class SuperselectionViolation(InterlabError):
    pass


class NotMaximal(InterlabError):
    def __init__(self, value: float, message: str | None = None):
        self.value = value
        super().__init__(message or f"interference {value:.12g} is below the maximal value 1/2")


class FormViolation(InterlabError):
    """A canonical-form condition failed; ``condition`` names which one."""

    def __init__(self, condition: str, residual: float, message: str = ""):
        self.condition = condition
        self.residual = residual
        super().__init__(f"{condition}: residual {residual:.3e}" + (f" ({message})" if message else ""))


class UnsupportedSupport(InterlabError):
    pass


class ConstraintInfeasible(InterlabError, ValueError):
    pass


class ZeroProbabilityCondition(InterlabError):
    pass


class MapError(InterlabError, ValueError):
    pass


class AnnotationError(InterlabError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class ScenarioError(InterlabError, ValueError):
    """A scenario description could not be parsed or names something unknown."""
