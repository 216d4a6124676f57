"""Exception hierarchy shared across the package."""


class GraphError(ValueError):
    pass


class SelfLoopError(GraphError):
    pass


class DuplicateEdgeError(GraphError):
    pass


class MissingEdgeError(GraphError):
    pass


class NodeRemovedError(GraphError):
    pass


class DisconnectedGraphError(GraphError):
    pass


class CompleteGraphError(GraphError):
    """Raised when an edge is requested from a graph that has no non-edges."""


class ParseError(GraphError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SizeOutOfRangeError(GraphError):
    pass


class TooLargeError(ValueError):
    pass


class InvalidActionError(ValueError):
    pass


class TerminalStateError(RuntimeError):
    pass


class ConvergenceError(RuntimeError):
    pass


class ShapeMismatchError(ValueError):
    pass
