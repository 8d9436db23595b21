from typing import Optional

__all__ = [
    "AiryLineError",
    "DomainError",
    "ConfigError",
    "ParseError",
    "AccuracyError",
    "NumericError",
    "InfeasibleError",
    "IoError",
]


class AiryLineError(Exception):
    """
    Base class of every error raised by airyline.

    `category` is the machine-readable name printed by the CLI,
    `exit_code` the process status it maps to.
    """

    category = "error"
    exit_code = 1


class DomainError(AiryLineError, ValueError):
    category = "domain"
    exit_code = 4


class ConfigError(AiryLineError, ValueError):
    category = "config"
    exit_code = 3


class ParseError(ConfigError):
    category = "parse"
    exit_code = 2

    def __init__(
        self,
        message: str,
        field: Optional[str] = None,
        line: Optional[int] = None,
        column: Optional[int] = None,
    ):
        location = ""
        if line is not None:
            location = f" (line {line}, column {column})"
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message + location)
        self.field = field
        self.line = line
        self.column = column


class AccuracyError(AiryLineError):
    """
    A tolerance could not be met within the resource cap.
    Carries the best value reached and its error estimate.
    """

    category = "accuracy"
    exit_code = 5

    def __init__(self, message: str, value=None, error_estimate: float = float("inf")):
        super().__init__(f"{message} (error estimate {error_estimate:.3e})")
        self.value = value
        self.error_estimate = error_estimate


class NumericError(AiryLineError, ArithmeticError):
    category = "numeric"
    exit_code = 6


class InfeasibleError(AiryLineError):
    category = "infeasible"
    exit_code = 7


class IoError(AiryLineError, OSError):
    category = "io"
    exit_code = 8
