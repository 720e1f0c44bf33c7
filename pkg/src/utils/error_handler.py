"""Error handling utilities for the simulator."""

from __future__ import annotations

import logging
import time
import traceback
from types import TracebackType
from typing import Any

from .exceptions import TopDPError
from .logging import get_audit_logger

logger = logging.getLogger(__name__)
audit_logger = get_audit_logger()


class ErrorHandler:
    """Centralized error handler for the application."""

    def __init__(self) -> None:
        self.error_counts: dict[str, int] = {}

    def handle_error(
        self, error: BaseException, context: dict[str, Any] | None = None
    ) -> dict[str, Any]:
        """Count and log an error, returning the logged record."""
        error_type = type(error).__name__
        self.error_counts[error_type] = self.error_counts.get(error_type, 0) + 1

        error_info: dict[str, Any] = {
            "error_type": error_type,
            "error_message": str(error),
            "context": context,
            "timestamp": time.time(),
            "traceback": "".join(
                traceback.format_exception(type(error), error, error.__traceback__)
            ),
        }
        if isinstance(error, TopDPError):
            error_dict = error.to_dict()
            error_dict.pop("message", None)
            error_info.update(error_dict)

        logger.error(
            f"Error occurred: {error}",
            extra={"error_code": error_info.get("error_code")},
        )
        audit_logger.error("Run error", extra={"error_code": error_info.get("error_code")})
        return error_info

    def get_error_summary(self) -> dict[str, Any]:
        """Get summary of error counts."""
        return {
            "total_errors": sum(self.error_counts.values()),
            "error_counts": self.error_counts.copy(),
        }

    def reset_error_counts(self) -> None:
        """Reset error counts."""
        self.error_counts.clear()


_error_handler: ErrorHandler | None = None


def get_error_handler() -> ErrorHandler:
    """Get the global error handler instance."""
    global _error_handler
    if _error_handler is None:
        _error_handler = ErrorHandler()
    return _error_handler


class error_context:
    """Context manager that reports errors with additional context, then re-raises."""

    def __init__(self, context: dict[str, Any]) -> None:
        self.context = context

    def __enter__(self) -> error_context:
        return self

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc_value: BaseException | None,
        tb: TracebackType | None,
    ) -> bool:
        if exc_value is not None:
            get_error_handler().handle_error(exc_value, self.context)
        return False
