"""Exception hierarchy. Each class carries the CLI exit code for its error class."""

from __future__ import annotations


class RestorableError(Exception):
    exit_code = 1


class GraphFormatError(RestorableError, ValueError):
    """Malformed edge-list input."""

    exit_code = 2


class MalformedLine(GraphFormatError):
    pass


class VertexOutOfRange(GraphFormatError):
    pass


class DuplicateEdge(GraphFormatError):
    pass


class SelfLoop(GraphFormatError):
    pass


class InvalidFaultSet(RestorableError, ValueError):
    exit_code = 2


class TieDetected(RestorableError):
    """Two distinct relaxations reached a vertex with identical weight."""

    exit_code = 3

    def __init__(self, vertex: int, source: int):
        super().__init__(f"shortest-path tie at vertex {vertex} (source {source})")
        self.vertex = vertex
        self.source = source


class TieUnresolved(RestorableError):
    exit_code = 3


class PathNotShortest(RestorableError, ValueError):
    exit_code = 4


class BudgetExceeded(RestorableError):
    exit_code = 5


class BudgetViolation(RestorableError, ValueError):
    exit_code = 5


class NonIntegralRecursion(RestorableError, ValueError):
    exit_code = 6


class SizeInfeasible(RestorableError, ValueError):
    exit_code = 6


class Nondeterminism(RestorableError):
    exit_code = 7


class CapExceeded(RestorableError):
    exit_code = 7


class PayloadTooLarge(RestorableError):
    exit_code = 7


class VerificationFailed(RestorableError):
    exit_code = 10
