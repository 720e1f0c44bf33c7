"""Brute-force checks of a synchronous message log against the graph."""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass

from ..models.trace import Message
from ..topology.cover import non_adjacent_neighbors
from ..topology.graph import Graph

SIGMA_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Violation:
    kind: str
    message: Message

    def __str__(self) -> str:
        m = self.message
        return (
            f"{self.kind}: iteration {m.iteration} {m.sender}->{m.recipient} "
            f"helper={m.helper} sigma={m.sigma_used!r}/{m.full_sigma!r}"
        )


def audit_messages(g: Graph, messages: Iterable[Message]) -> list[Violation]:
    """Return every message that breaks a noise-reduction invariant.

    Checked per message: it travels along an edge (``locality``); a helper,
    when named, is a neighbor of the sender and not adjacent to the
    recipient (``soundness``); a recipient no helper could cover receives
    the full decayed sigma (``full_scale``); no message carries more than
    full-scale noise.
    """
    violations: list[Violation] = []
    for msg in messages:
        if not g.has_edge(msg.sender, msg.recipient):
            violations.append(Violation("locality", msg))
            continue
        if msg.helper is not None and (
            not g.has_edge(msg.sender, msg.helper)
            or g.has_edge(msg.helper, msg.recipient)
            or msg.helper == msg.recipient
        ):
            violations.append(Violation("soundness", msg))
        if msg.sigma_used > msg.full_sigma * (1 + SIGMA_TOLERANCE):
            violations.append(Violation("excess_noise", msg))
        if not non_adjacent_neighbors(g, msg.sender, msg.recipient) and (
            msg.helper is not None
            or abs(msg.sigma_used - msg.full_sigma) > SIGMA_TOLERANCE * msg.full_sigma
        ):
            violations.append(Violation("full_scale", msg))
    return violations
