"""Record types produced by a training run."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import NDArray


@dataclass(frozen=True)
class Message:
    """One estimate sent along an edge.

    ``sigma_used`` and ``full_sigma`` are diagnostics for auditing; the
    receiving agent only ever reads ``payload``.
    """

    sender: int
    recipient: int
    iteration: int
    payload: NDArray[np.float64] = field(repr=False, compare=False)
    sigma_used: float
    full_sigma: float
    helper: int | None = None

    @property
    def reduced(self) -> bool:
        return self.sigma_used < self.full_sigma

    def to_dict(self) -> dict[str, Any]:
        return {
            "iteration": self.iteration,
            "sender": self.sender,
            "recipient": self.recipient,
            "helper": self.helper,
            "sigma_used": self.sigma_used,
            "full_sigma": self.full_sigma,
        }


@dataclass(frozen=True)
class TraceRecord:
    """Per-agent state at one evaluation point."""

    iteration: int
    agent_id: int
    accuracy: float
    spent_epsilon: float
    mean_sigma: float
    messages_sent: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "iteration": self.iteration,
            "agent_id": self.agent_id,
            "accuracy": self.accuracy,
            "spent_epsilon": self.spent_epsilon,
            "mean_sigma": self.mean_sigma,
            "messages_sent": self.messages_sent,
        }


@dataclass(frozen=True)
class MetricsRecord:
    """Across-agent summary of one evaluation point."""

    iteration: int
    mean_accuracy: float
    std_accuracy: float
    max_spent_epsilon: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "iteration": self.iteration,
            "mean_accuracy": self.mean_accuracy,
            "std_accuracy": self.std_accuracy,
            "max_spent_epsilon": self.max_spent_epsilon,
        }


@dataclass
class TrainingTrace:
    """Everything a protocol run reports back to the harness."""

    records: list[TraceRecord] = field(default_factory=list)
    messages: list[Message] = field(default_factory=list)
    participation: list[int] = field(default_factory=list)
    pairings: list[list[tuple[int, int]]] = field(default_factory=list)
    metadata: dict[str, Any] = field(default_factory=dict)

    def iterations(self) -> list[int]:
        return sorted({r.iteration for r in self.records})

    def final_records(self) -> list[TraceRecord]:
        if not self.records:
            return []
        last = self.records[-1].iteration
        return [r for r in self.records if r.iteration == last]

    def final_mean_accuracy(self) -> float:
        final = self.final_records()
        if not final:
            return float("nan")
        return float(np.mean([r.accuracy for r in final]))
