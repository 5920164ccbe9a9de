"""Exception hierarchy shared by every layer of the engine."""


class UmtError(Exception):
    """Base class for all engine errors."""


class ParseError(UmtError):
    """Raised on malformed metamodel, model, spec or expression text.

    Attributes:
        line: 1-based line number, or 0 when unknown.
        column: 1-based column number, or 0 when unknown.
    """

    def __init__(self, message, line=0, column=0):
        if line:
            super().__init__(f"line {line}, column {column}: {message}")
        else:
            super().__init__(message)
        self.message = message
        self.line = line
        self.column = column


class ResolveError(UmtError):
    """Static name-resolution or type error in an expression."""


class ModelError(UmtError):
    """A model operation violated the metamodel (unknown feature, bad type...)."""


class EvalError(UmtError):
    """Runtime failure while evaluating an expression."""


class PlanningError(UmtError):
    """The constraints cannot be ordered into phases (dependency cycle)."""


class ExecutionError(UmtError):
    """Failure while establishing a postcondition."""
