"""Exception taxonomy shared across the package.

Two top-level families matter to callers (and to the CLI's exit codes):
``UsageError`` for contract violations by the caller, ``DataError`` for
malformed or undersized input data and model files.
"""


class IrrinetError(Exception):
    """Base class for all package errors."""


class UsageError(IrrinetError):
    """The caller violated an operation's precondition (bad arguments)."""


class DataError(IrrinetError):
    """Input data is malformed, out of range, or too small."""


class CsvParseError(DataError):
    """A CSV row could not be parsed; message carries the row number."""


class MoistureRangeError(DataError):
    """A moisture value fell outside [0, 1]; message names row and column."""


class ModelFormatError(DataError):
    """A model file is truncated, malformed, or of unknown kind."""


class FrameError(DataError):
    """A wire frame failed validation."""


class FramingError(FrameError):
    """Bad sync byte or otherwise unframeable bytes."""


class FrameLengthError(FrameError):
    """Truncated or length-inconsistent frame."""


class FrameIntegrityError(FrameError):
    """CRC mismatch."""
