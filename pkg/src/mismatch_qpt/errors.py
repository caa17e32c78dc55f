"""Exception types shared across the package.

The CLI maps these onto exit codes: OSError -> 1, usage errors -> 2,
ValidationError (and subclasses) -> 3, NumericalError -> 4.
"""


class MismatchQptError(Exception):
    """Base class for all package errors."""


class ValidationError(MismatchQptError, ValueError):
    """Malformed input data, labels, parameters or file contents."""


class DimensionMismatchError(ValidationError):
    """Displacements of unequal dimensionality combined in one computation."""


class ModeError(ValidationError):
    """Reference to an unknown, duplicate or otherwise invalid spatial mode."""


class CircuitParseError(ValidationError):
    """Syntax or semantic error in the circuit description language."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class NumericalError(MismatchQptError, ArithmeticError):
    """Internal numerical consistency failure (negative norms, non-physical
    matrices beyond tolerance, degenerate normalization)."""
