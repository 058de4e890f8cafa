"""Exception types shared across the toolkit."""


class ChainrankError(Exception):
    """Base class for all toolkit errors."""


class DataError(ChainrankError):
    """Invalid or inconsistent input data (maps to CLI exit code 2)."""


class LogParseError(DataError):
    """A log line could not be parsed; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class StageError(ChainrankError):
    """A pipeline stage cannot run (missing upstream artifact, version mismatch)."""
