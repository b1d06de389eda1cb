"""
Error types and exit-code mapping for StarBasis.

Every failure a user can cause is an InputError (exit code 1); bugs and
unexpected numeric failures surface as exit code 2.
"""

from typing import Any, Dict, Optional, Type

import click

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_INTERNAL_ERROR = 2


class StarBasisError(Exception):
    """Base class for all StarBasis errors."""

    exit_code = EXIT_INTERNAL_ERROR

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.message = message
        self.context = context

    def to_dict(self) -> Dict[str, Any]:
        """Serializable description used in reports and logs."""
        return {
            'error': type(self).__name__,
            'message': self.message,
            **{k: v for k, v in self.context.items() if _is_plain(v)},
        }


class InputError(StarBasisError):
    """Invalid user input, annotation or parameter."""
    exit_code = EXIT_INPUT_ERROR


class InternalError(StarBasisError):
    """Unexpected failure inside StarBasis."""
    exit_code = EXIT_INTERNAL_ERROR


class EmptyShape(InputError):
    """Shape has no interior."""


class DegenerateShape(InputError):
    """Maximum inscribed radius is below the grid resolution.

    The fallback point (shape centroid clamped inside) is kept on the
    exception so callers may still use it.
    """

    def __init__(self, message: str, fallback=None, **context: Any):
        super().__init__(message, **context)
        self.fallback = fallback


class CenterOutsideShape(InputError):
    """A supplied polar center lies outside the shape."""


class InvalidN(InputError):
    """Contour resolution below 3 samples."""


class InvalidM(InputError):
    """Descriptor dimension out of range."""


class EmptyMatrix(InputError):
    """Contour matrix without columns."""


class DimensionMismatch(InputError):
    """Vector or matrix sizes disagree."""


class IllConditioned(InputError):
    """Least-squares system is numerically singular."""


class TooFewPoints(InputError):
    """Not enough points for the requested operation."""


class EmptyContour(InputError):
    """Boundary point set is empty."""


class ParseError(InputError):
    """Annotation or config document could not be parsed."""

    def __init__(self, message: str, line: Optional[int] = None,
                 column: Optional[int] = None, **context: Any):
        super().__init__(message, line=line, column=column, **context)
        self.line = line
        self.column = column

    def __str__(self) -> str:
        if self.line is not None:
            return f"{self.message} (line {self.line}, column {self.column})"
        return self.message


class UnknownCategoryId(InputError):
    """Annotation references a category id missing from the document."""


class InvalidParams(InputError):
    """Generator or command parameters are inconsistent."""


class EmptyGroup(InputError):
    """A contour group ended up with no instances."""


class ConfigError(InputError):
    """Configuration file or value is invalid."""


def _is_plain(value: Any) -> bool:
    return value is None or isinstance(value, (str, int, float, bool))


_EXIT_CODES: Dict[Type[BaseException], int] = {
    click.UsageError: EXIT_INPUT_ERROR,
    click.ClickException: EXIT_INPUT_ERROR,
    click.Abort: EXIT_INPUT_ERROR,
    InputError: EXIT_INPUT_ERROR,
    FileNotFoundError: EXIT_INPUT_ERROR,
    StarBasisError: EXIT_INTERNAL_ERROR,
}


def exit_code_for(error: BaseException) -> int:
    """
    Map an exception to the CLI exit code.

    Args:
        error: Exception raised by a command

    Returns:
        int: 1 for input errors, 2 for everything else
    """
    for error_type, code in _EXIT_CODES.items():
        if isinstance(error, error_type):
            return code
    return EXIT_INTERNAL_ERROR
