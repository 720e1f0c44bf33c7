"""Lock-step protocol with topology-aware noise reduction."""

from __future__ import annotations

import logging
from collections.abc import Sequence

from ..learning.data import Dataset
from ..learning.models import Model
from ..learning.updates import LearningConfig, aggregate_update
from ..models.trace import Message, TrainingTrace
from ..privacy.mechanism import FULL_SCALE_FALLBACK, reduced_sigma
from ..topology.cover import cover_neighbors
from ..topology.graph import Graph
from .agent import AgentState, Mode
from .base import RecordCallback, RoundEngine

logger = logging.getLogger(__name__)


class SynchronousEngine(RoundEngine):
    """Every agent steps every round; sends become visible next round.

    Per round and agent: one clipped gradient, one per-recipient estimate
    for every neighbor a helper can cover (reduced noise), one local
    estimate with full-scale noise mixed with a random neighbor, and that
    local estimate sent to the remaining neighbors.
    """

    name = "sync"

    def _round(self, t: int) -> None:
        outgoing = self._map(lambda agent: self._step(agent, t), self.agents)
        for messages in outgoing:
            self._deliver(messages)

    def _step(self, agent: AgentState, t: int) -> list[Message]:
        i = agent.id
        sigma = self._sigma(agent, t)
        lam = self.cfg.rate(t)
        alpha = self.cfg.alpha
        gbar = self._clipped_gradient(agent, agent.estimate)
        neighbors = sorted(self.g.neighbors(i))

        messages: list[Message] = []
        uncovered = set(neighbors)
        if self.mode.reduces_noise:
            plan = cover_neighbors(self.g, i, agent.streams.cover)
            for k, targets in plan.assignments:
                reduced = reduced_sigma(sigma, agent.neighbor_sigma(k, t), alpha)
                used = sigma if reduced is FULL_SCALE_FALLBACK else reduced
                for j in sorted(targets):
                    payload = aggregate_update(
                        agent.estimate, agent.inbox[k], alpha, lam, gbar, self._noise(agent, used)
                    )
                    messages.append(Message(i, j, t, payload, used, sigma, helper=k))
            uncovered = set(plan.uncovered)

        j_star = neighbors[int(agent.streams.select.integers(len(neighbors)))]
        agent.estimate = aggregate_update(
            agent.estimate, agent.inbox[j_star], alpha, lam, gbar, self._noise(agent, sigma)
        )
        self._check_finite(agent)
        messages.extend(
            Message(i, j, t, agent.estimate, sigma, sigma) for j in sorted(uncovered)
        )
        agent.accountant.charge()
        return messages


def run_synchronous(
    g: Graph,
    agents: Sequence[AgentState],
    model: Model,
    cfg: LearningConfig,
    iterations: int,
    mode: Mode,
    testset: Dataset,
    *,
    eval_every: int | None = None,
    workers: int = 1,
    record_messages: bool = False,
    on_record: RecordCallback | None = None,
) -> TrainingTrace:
    """Run the synchronous protocol and return its trace."""
    engine = SynchronousEngine(
        g,
        agents,
        model,
        cfg,
        mode,
        testset,
        eval_every=eval_every,
        workers=workers,
        record_messages=record_messages,
        on_record=on_record,
    )
    return engine.run(iterations)
