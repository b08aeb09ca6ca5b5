"""Exception hierarchy shared across the package."""


class GtspError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInstanceError(GtspError):
    pass


class DisconnectedDestinationsError(InvalidInstanceError):
    pass


class GraphFormatError(GtspError):
    """Malformed graph or instance text.  ``line`` is 1-based."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DuplicateNameError(GraphFormatError):
    pass


class DanglingEndpointError(GraphFormatError):
    pass


class UnknownCityError(GtspError):
    pass


class NotCubicError(GtspError):
    pass


class DegreeCapExceededError(GtspError):
    pass


class EvenSubsetError(GtspError):
    pass


class SteinerEndpointError(GtspError):
    pass


class WalkPreconditionError(GtspError):
    """Raised by Euler-walk extraction; carries the failing verdict."""

    def __init__(self, message, verdict=None):
        self.verdict = verdict
        super().__init__(message)


class CertificationError(GtspError):
    pass


class NoSpanningTreeError(CertificationError):
    def __init__(self, message, component=()):
        self.component = tuple(component)
        super().__init__(message)


class OddParityError(CertificationError):
    def __init__(self, message, nodes=()):
        self.nodes = tuple(nodes)
        super().__init__(message)


class WalkFailureError(CertificationError):
    pass


class SolveError(GtspError):
    pass


class InfeasibleModelError(SolveError):
    pass


class SolveLimitError(SolveError):
    """An iteration, node, round or time limit stopped a solve before optimality."""
