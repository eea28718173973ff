# profiles/exceptions.py


class StoreError(Exception):
    """Base exception for the request log and profile store."""


class DuplicateRequestError(StoreError, ValueError):
    """Raised when a request id is already present in the log."""

    def __init__(self, request_id: str):
        self.request_id = request_id
        super().__init__(f"Request id '{request_id}' already exists")


class InvalidRecordError(StoreError, ValueError):
    """Raised when a request record fails validation."""

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        self.detail = message
        self.line = line
        self.field = field
        where = f"line {line}: " if line is not None else ""
        what = f"{field}: " if field else ""
        super().__init__(f"{where}{what}{message}")


class StoreUnreadableError(StoreError, OSError):
    """Raised when the store files exist but cannot be read."""
