"""Shared exception types."""


class ResourceLimitError(RuntimeError):
    """A construction exceeded its configured state budget."""


class FormatError(ValueError):
    """Malformed machine file; carries a line number when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
