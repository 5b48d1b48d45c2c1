"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes, so solver and data failures must stay
distinguishable from plain usage errors.
"""


class CsmcError(Exception):
    """Base class for all package errors."""


class DomainError(CsmcError, ValueError):
    """An argument is outside the documented domain of an operation."""


class ShapeError(CsmcError, ValueError):
    """Matrix/index shapes are inconsistent or indices are out of range."""


class UnconstrainedColumnError(CsmcError):
    """A least-squares solve received no observed rows; caller policy applies."""


class DivergenceError(CsmcError, RuntimeError):
    """An iterative solver produced a non-finite iterate."""

    def __init__(self, message: str, iteration: int):
        super().__init__(f"{message} (iteration {iteration})")
        self.iteration = iteration


class DataError(CsmcError):
    """A data file is missing, malformed, or violates format constraints."""


class ParseError(DataError, ValueError):
    """A text data file failed to parse; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line
