"""Record types shared by the protocol engines and the harness."""

from .trace import Message, MetricsRecord, TraceRecord, TrainingTrace

__all__ = ["Message", "MetricsRecord", "TraceRecord", "TrainingTrace"]
