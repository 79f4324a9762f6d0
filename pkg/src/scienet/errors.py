"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: usage/config errors exit 1,
data/format errors exit 2 and numeric failures exit 3.
"""


class ScieNetError(Exception):
    exit_code = 1


class ConfigError(ScieNetError):
    exit_code = 1


class ParameterError(ScieNetError, ValueError):
    exit_code = 1


class InputDomainError(ScieNetError, ValueError):
    exit_code = 2


class StructuralError(ScieNetError, ValueError):
    exit_code = 2


class FormatError(ScieNetError, ValueError):
    """Malformed file; ``offset`` is the byte position where parsing failed."""

    exit_code = 2

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class NumericError(ScieNetError, ArithmeticError):
    exit_code = 3
