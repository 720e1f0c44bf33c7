"""CSV emission for traces, message logs and summaries."""

from __future__ import annotations

import csv
import io
from collections.abc import Iterable
from pathlib import Path
from types import TracebackType
from typing import Any, TextIO

import numpy as np
import pandas as pd

from ..models.trace import Message, MetricsRecord, TraceRecord
from .exceptions import TopDPError

TRACE_COLUMNS = [
    "iteration",
    "agent_id",
    "accuracy",
    "spent_epsilon",
    "mean_sigma",
    "messages_sent",
]
MESSAGE_COLUMNS = ["iteration", "sender", "recipient", "helper", "sigma_used", "full_sigma"]
SUMMARY_COLUMNS = ["iteration", "mean_accuracy", "std_accuracy", "max_spent_epsilon"]

# pandas skips lines starting with this when reading traces back
FAILURE_MARKER = "#FAILED"


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _row(data: dict[str, Any], columns: list[str]) -> list[str]:
    return [_cell(data[c]) for c in columns]


def to_csv_string(records: Iterable[TraceRecord], header: bool = True) -> str:
    """Render trace records as CSV text, with a header row unless ``header`` is off."""
    output = io.StringIO()
    writer = csv.writer(output, lineterminator="\n")
    if header:
        writer.writerow(TRACE_COLUMNS)
    for record in records:
        writer.writerow(_row(record.to_dict(), TRACE_COLUMNS))
    return output.getvalue()


class TraceWriter:
    """Appends trace records to a CSV file as they are produced.

    Used as a context manager; rows are flushed after every batch so a
    failed run leaves everything recorded so far, followed by a marker row.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._file: TextIO | None = None
        self.rows_written = 0

    def __enter__(self) -> TraceWriter:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._file = self.path.open("w", newline="")
        self._file.write(to_csv_string([]))
        return self

    def write(self, records: Iterable[TraceRecord]) -> None:
        if self._file is None:
            raise RuntimeError("TraceWriter is not open")
        batch = list(records)
        self._file.write(to_csv_string(batch, header=False))
        self.rows_written += len(batch)
        self._file.flush()

    def mark_failure(self, error: BaseException) -> None:
        if self._file is None:
            return
        code = error.error_code if isinstance(error, TopDPError) else type(error).__name__
        self._file.write(f"{FAILURE_MARKER} {code}\n")
        self._file.flush()

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc_val: BaseException | None,
        exc_tb: TracebackType | None,
    ) -> None:
        if exc_val is not None:
            self.mark_failure(exc_val)
        if self._file is not None:
            self._file.close()
            self._file = None


def write_messages(messages: Iterable[Message], path: str | Path) -> Path:
    """Write the message log (payloads omitted)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(MESSAGE_COLUMNS)
        for msg in messages:
            writer.writerow(_row(msg.to_dict(), MESSAGE_COLUMNS))
    return path


def summarize(records: Iterable[TraceRecord]) -> list[MetricsRecord]:
    """Across-agent mean/std accuracy and max spend per evaluation point."""
    frame = pd.DataFrame([r.to_dict() for r in records], columns=TRACE_COLUMNS)
    return _summarize_frame(frame)


def summarize_trace(trace_csv: str | Path) -> list[MetricsRecord]:
    """Recompute the summary stream from a trace CSV."""
    frame = pd.read_csv(trace_csv, comment="#")
    return _summarize_frame(frame)


def _summarize_frame(frame: pd.DataFrame) -> list[MetricsRecord]:
    metrics = []
    for iteration, group in frame.groupby("iteration", sort=True):
        accuracies = group["accuracy"].to_numpy(dtype=float)
        metrics.append(
            MetricsRecord(
                iteration=int(iteration),
                mean_accuracy=float(np.mean(accuracies)),
                std_accuracy=float(np.std(accuracies)),
                max_spent_epsilon=float(group["spent_epsilon"].astype(float).max()),
            )
        )
    return metrics


def write_summary(metrics: Iterable[MetricsRecord], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame([m.to_dict() for m in metrics], columns=SUMMARY_COLUMNS)
    frame.to_csv(path, index=False, lineterminator="\n")
    return path
