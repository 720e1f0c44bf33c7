"""Custom exceptions for the Top-DP simulator."""

from __future__ import annotations

from typing import Any


class TopDPError(Exception):
    """Base exception for simulator errors."""

    def __init__(
        self,
        message: str,
        error_code: str | None = None,
        details: dict[str, Any] | None = None,
    ):
        """Initialize simulator error.

        Args:
            message: Error message
            error_code: Optional error code for categorization
            details: Optional additional error details
        """
        super().__init__(message)
        self.message = message
        self.error_code = error_code
        self.details = details or {}

    def to_dict(self) -> dict[str, Any]:
        """Convert exception to dictionary for logging/serialization.

        Returns:
            Dictionary representation of the exception
        """
        return {
            "error_type": self.__class__.__name__,
            "message": self.message,
            "error_code": self.error_code,
            "details": self.details,
        }


class ConfigurationError(TopDPError):
    """Configuration-related errors."""

    def __init__(
        self,
        message: str,
        key: str | None = None,
        config_path: str | None = None,
        **kwargs: Any,
    ):
        """Initialize configuration error.

        Args:
            message: Error message
            key: Configuration key that caused the error
            config_path: Path to configuration file that caused the error
            **kwargs: Additional keyword arguments
        """
        super().__init__(message, error_code="CONFIG_ERROR", **kwargs)
        self.key = key
        if key:
            self.details["key"] = key
        if config_path:
            self.details["config_path"] = config_path


class ValidationError(TopDPError):
    """Input validation errors."""

    def __init__(
        self,
        message: str,
        field_name: str | None = None,
        field_value: Any = None,
        **kwargs: Any,
    ):
        """Initialize validation error.

        Args:
            message: Error message
            field_name: Name of field that failed validation
            field_value: Value that failed validation
            **kwargs: Additional keyword arguments
        """
        super().__init__(message, error_code="VALIDATION_ERROR", **kwargs)
        if field_name:
            self.details["field_name"] = field_name
        if field_value is not None:
            self.details["field_value"] = field_value


class GraphGenerationError(TopDPError):
    """Raised when a generator cannot produce a connected graph."""

    def __init__(self, message: str, attempts: int | None = None, **kwargs: Any):
        super().__init__(message, error_code="GRAPH_GENERATION_ERROR", **kwargs)
        if attempts is not None:
            self.details["attempts"] = attempts


class TopologyError(TopDPError):
    """Malformed graphs or queries that violate adjacency preconditions."""

    def __init__(self, message: str, **kwargs: Any):
        super().__init__(message, error_code="TOPOLOGY_ERROR", **kwargs)


class DatasetError(TopDPError):
    """Dataset loading and shape errors."""

    def __init__(self, message: str, path: str | None = None, **kwargs: Any):
        """Initialize dataset error.

        Args:
            message: Error message
            path: File that could not be read
            **kwargs: Additional keyword arguments
        """
        super().__init__(message, error_code="DATASET_ERROR", **kwargs)
        if path:
            self.details["path"] = path


class DimensionMismatchError(TopDPError):
    """Vector or matrix lengths disagree."""

    def __init__(
        self,
        message: str,
        expected: int | None = None,
        actual: int | None = None,
        **kwargs: Any,
    ):
        super().__init__(message, error_code="DIMENSION_ERROR", **kwargs)
        if expected is not None:
            self.details["expected"] = expected
        if actual is not None:
            self.details["actual"] = actual


class ProtocolError(TopDPError):
    """Round-engine precondition failures."""

    def __init__(self, message: str, agent_id: int | None = None, **kwargs: Any):
        super().__init__(message, error_code="PROTOCOL_ERROR", **kwargs)
        if agent_id is not None:
            self.details["agent_id"] = agent_id
