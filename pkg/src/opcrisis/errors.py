"""Exception hierarchy shared by every stage.

Three bases map onto the CLI exit codes: bad data (1), numeric failure (2),
bad configuration (3). Everything raised on purpose inside the package
derives from OpcrisisError so the CLI can translate it.
"""

from __future__ import annotations


class OpcrisisError(Exception):
    exit_code = 1


class InputError(OpcrisisError):
    """Unusable input data or files."""

    exit_code = 1


class NumericError(OpcrisisError):
    """A computation is undefined or failed to converge."""

    exit_code = 2


class ConfigError(OpcrisisError):
    """A parameter or configuration value is out of contract."""

    exit_code = 3


class FileUnreadable(InputError):
    pass


class SchemaViolation(InputError):
    """A record line breaks the documented schema."""

    def __init__(self, line_no: int, field: str, reason: str):
        self.line_no = line_no
        self.field = field
        self.reason = reason
        super().__init__(f"line {line_no}: field {field!r}: {reason}")


class EmptyDataset(InputError):
    pass


class MissingData(InputError):
    pass


class CatalogMismatch(InputError):
    pass


class NoCompleteRows(InputError):
    pass


class EmptyCorpus(InputError):
    pass


class DegenerateCorpus(InputError):
    pass


class EmptyTestset(InputError):
    pass


class EmptySequence(InputError):
    pass


class LengthMismatch(InputError):
    pass


class IncompleteVector(InputError):
    """An observation lacks values for required indicator codes."""

    def __init__(self, codes, message: str | None = None):
        self.codes = tuple(codes)
        super().__init__(message or f"missing indicator values: {', '.join(self.codes)}")


class ZeroColumn(InputError):
    pass


class OutputUnwritable(InputError):
    pass


class DegenerateInput(NumericError):
    """Statistic undefined for this input (e.g. constant vector)."""


class NotSymmetric(NumericError):
    pass


class NoConvergence(NumericError):
    pass


class InvalidRho(ConfigError):
    pass


class InvalidWindow(ConfigError):
    pass
