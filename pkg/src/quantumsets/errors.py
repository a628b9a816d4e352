"""Exception hierarchy shared by every module."""


class QuantumSetError(Exception):
    pass


class DimensionError(QuantumSetError, ValueError):
    pass


class NotAProjectionError(QuantumSetError, ValueError):
    pass


class ParseError(QuantumSetError, ValueError):
    """Syntax error in a formula, carrying a 1-based line/column."""

    def __init__(self, message, line=1, column=1):
        super().__init__(f"{message} at line {line}, column {column}")
        self.message = message
        self.line = line
        self.column = column


class SemanticError(QuantumSetError):
    """Unbound names, missing fragments, non-Delta0 input and similar misuse."""


class ConsistencyError(QuantumSetError):
    """Two independent computations of the same quantity disagree."""
