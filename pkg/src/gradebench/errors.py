"""Exception types shared across the workbench."""


class GradebenchError(Exception):
    """Base class for all workbench errors."""


class ResponseFormatError(GradebenchError):
    """A response file line could not be parsed or validated.

    Carries the 1-based line number and the byte offset of the line start
    within the (decompressed) stream.
    """

    def __init__(self, message: str, line_no: int, byte_offset: int):
        super().__init__(f"line {line_no} (byte offset {byte_offset}): {message}")
        self.line_no = line_no
        self.byte_offset = byte_offset


class TestBankFormatError(GradebenchError):
    pass


class GenerationParseError(GradebenchError):
    """The backend completion did not contain a parseable JSON block."""

    def __init__(self, message: str, completion: str):
        super().__init__(message)
        self.completion = completion


class EmptyTestBankError(GradebenchError):
    pass


class EntryNotFoundError(GradebenchError):
    pass


class EntryConflictError(GradebenchError):
    pass


class BudgetError(GradebenchError):
    """The prompt cannot fit the token budget even with an empty context."""


class TransportError(GradebenchError):
    """Backend unreachable or retries exhausted on transient failures."""

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class RequestError(GradebenchError):
    """Backend rejected the request (non-retryable 4xx)."""

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class JobAbortedError(GradebenchError):
    """Too many per-pair grading failures; the job was aborted."""


class TrecFormatError(GradebenchError):
    """A qrels or run file line is malformed; carries the line number."""

    def __init__(self, message: str, line_no: int):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class UnknownMethodError(GradebenchError):
    pass


class CorrelationError(GradebenchError):
    """Correlation undefined (length mismatch or zero-variance input)."""
