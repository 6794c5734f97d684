"""Exception types shared across the package."""


class RecordLabError(Exception):
    """Base class for recordlab errors."""


class CsvParseError(RecordLabError):
    """Malformed CSV input. Carries the 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SimulationOverflow(RecordLabError):
    """Simulated values left the representable positive float range."""


class FitError(RecordLabError):
    """Estimation failed. Diagnostics, when available, are in ``details``."""

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message)
        self.details = dict(details or {})
