from __future__ import annotations

import json
import logging
from datetime import datetime

# LogRecord attributes passed through ``extra=`` that end up in JSON output.
EXTRA_FIELDS = ("run_id", "agent_id", "iteration", "error_code")


class JSONFormatter(logging.Formatter):
    """Formats log records as JSON."""

    def format(self, record: logging.LogRecord) -> str:
        log_object = {
            "timestamp": datetime.fromtimestamp(record.created).isoformat(),
            "level": record.levelname,
            "message": record.getMessage(),
            "logger_name": record.name,
            "module": record.module,
            "function": record.funcName,
            "line": record.lineno,
        }
        for name in EXTRA_FIELDS:
            if hasattr(record, name):
                log_object[name] = getattr(record, name)
        if record.exc_info:
            log_object["exception"] = self.formatException(record.exc_info)
        return json.dumps(log_object, default=str)


def get_audit_logger() -> logging.Logger:
    """Get the audit logger (privacy budget events and run failures)."""
    return logging.getLogger("audit")
