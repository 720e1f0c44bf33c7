"""Pairwise gossip protocol with random availability."""

from __future__ import annotations

import logging
from collections.abc import Collection, Mapping, Sequence

import numpy as np

from ..learning.data import Dataset
from ..learning.models import Model, ModelParams
from ..learning.updates import LearningConfig, aggregate_update, local_update
from ..models.trace import Message, TrainingTrace
from ..privacy.mechanism import FULL_SCALE_FALLBACK, reduced_sigma
from ..topology.graph import AgentId, Graph
from ..utils.exceptions import ValidationError
from ..utils.seeding import child_rng
from .agent import AgentState, Mode
from .base import RecordCallback, RoundEngine

logger = logging.getLogger(__name__)

Pair = tuple[AgentId, AgentId]


def pair_round(
    available: Collection[AgentId],
    g: Graph,
    last_pairs: Mapping[AgentId, AgentId | None],
    rng: np.random.Generator,
) -> list[Pair]:
    """Random matching among available agents.

    Agents are visited in random order; each still-unmatched agent proposes
    to a uniformly drawn eligible neighbor: adjacent, available, unmatched
    and not its partner of the previous round. Agents without an eligible
    neighbor stay unmatched. Pairs are returned as sorted (i < j) tuples.
    """
    pool = set(available)
    matched: set[AgentId] = set()
    pairs: list[Pair] = []
    for i in (int(v) for v in rng.permutation(sorted(pool))):
        if i in matched:
            continue
        eligible = [
            j
            for j in sorted(g.neighbors(i))
            if j in pool
            and j not in matched
            and last_pairs.get(i) != j
            and last_pairs.get(j) != i
        ]
        if not eligible:
            continue
        j = eligible[int(rng.integers(len(eligible)))]
        matched.update((i, j))
        pairs.append((min(i, j), max(i, j)))
    return sorted(pairs)


class AsynchronousEngine(RoundEngine):
    """Each round a random subset of agents is available; they pair up.

    A paired agent mixes with its partner's pre-round estimate and injects
    only the noise its partner's embedded noise does not already supply.
    Every agent left without a partner takes a local step with full noise.
    The scheduler stream is derived from the master seed.
    """

    name = "async"
    # partners swap current estimates when they pair
    broadcast_initial = False

    def __init__(
        self,
        g: Graph,
        agents: Sequence[AgentState],
        model: Model,
        cfg: LearningConfig,
        mode: Mode,
        testset: Dataset,
        *,
        dropout: float = 0.1,
        master_seed: int = 0,
        eval_every: int | None = None,
        workers: int = 1,
        record_messages: bool = False,
        on_record: RecordCallback | None = None,
    ):
        super().__init__(
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
        if not 0 <= dropout <= 1:
            raise ValidationError(
                "dropout must be in [0, 1]", field_name="dropout", field_value=dropout
            )
        self.dropout = dropout
        self.scheduler = child_rng(master_seed, "scheduler")

    def _round(self, t: int) -> None:
        # unavailable agents skip pairing but still train locally
        u = self.scheduler.random(self.g.n)
        available = [i for i in range(self.g.n) if u[i] >= self.dropout]
        last_pairs = {a.id: a.last_pair for a in self.agents}
        pairs = pair_round(available, self.g, last_pairs, self.scheduler)

        partner: dict[AgentId, AgentId] = {}
        for i, j in pairs:
            partner[i], partner[j] = j, i
        snapshot = {i: self.agents[i].estimate for i in partner}

        exchanged = []
        for i in sorted(partner):
            sigma = self._sigma(self.agents[i], t)
            exchanged.append(Message(i, partner[i], t, snapshot[i], sigma, sigma))
        self._deliver(exchanged)

        def step(agent: AgentState) -> None:
            self._step(agent, t, partner.get(agent.id), snapshot)

        self._map(step, self.agents)

        for agent in self.agents:
            agent.last_pair = partner.get(agent.id)
        self.trace.participation.append(len(available))
        self.trace.pairings.append(pairs)

    def _pair_sigma(self, agent: AgentState, k: AgentId, t: int) -> float:
        sigma = self._sigma(agent, t)
        if not self.mode.reduces_noise:
            return sigma
        reduced = reduced_sigma(sigma, agent.neighbor_sigma(k, t), self.cfg.alpha)
        return sigma if reduced is FULL_SCALE_FALLBACK else reduced

    def _step(
        self,
        agent: AgentState,
        t: int,
        k: AgentId | None,
        snapshot: Mapping[AgentId, ModelParams],
    ) -> None:
        lam = self.cfg.rate(t)
        gbar = self._clipped_gradient(agent, agent.estimate)
        if k is None:
            noise = self._noise(agent, self._sigma(agent, t))
            agent.estimate = local_update(agent.estimate, lam, gbar, noise)
        else:
            noise = self._noise(agent, self._pair_sigma(agent, k, t))
            agent.estimate = aggregate_update(
                snapshot[agent.id], snapshot[k], self.cfg.alpha, lam, gbar, noise
            )
        self._check_finite(agent)
        agent.accountant.charge()


def run_asynchronous(
    g: Graph,
    agents: Sequence[AgentState],
    model: Model,
    cfg: LearningConfig,
    iterations: int,
    dropout: float,
    mode: Mode,
    testset: Dataset,
    *,
    master_seed: int = 0,
    eval_every: int | None = None,
    workers: int = 1,
    record_messages: bool = False,
    on_record: RecordCallback | None = None,
) -> TrainingTrace:
    """Run the asynchronous protocol and return its trace."""
    engine = AsynchronousEngine(
        g,
        agents,
        model,
        cfg,
        mode,
        testset,
        dropout=dropout,
        master_seed=master_seed,
        eval_every=eval_every,
        workers=workers,
        record_messages=record_messages,
        on_record=on_record,
    )
    return engine.run(iterations)
