"""Agent state, run modes and the initial noise-parameter exchange."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..learning.data import Dataset
from ..learning.models import ModelParams
from ..privacy.accountant import PrivacyAccountant
from ..privacy.budget import NoiseSchedule, PrivacyBudget, calibrate_sigma0
from ..topology.graph import AgentId, Graph
from ..utils.exceptions import ProtocolError
from ..utils.logging import get_audit_logger
from ..utils.seeding import agent_rng

logger = logging.getLogger(__name__)


class Mode(Enum):
    """What noise an agent injects into the estimates it releases."""

    TOPDP = "topdp"
    TOPDP_NO_DECAY = "topdp_no_decay"
    FULL_NOISE = "full_noise"
    NO_NOISE = "no_noise"

    @property
    def reduces_noise(self) -> bool:
        return self in (Mode.TOPDP, Mode.TOPDP_NO_DECAY)

    @property
    def adds_noise(self) -> bool:
        return self is not Mode.NO_NOISE

    @property
    def decays(self) -> bool:
        return self is not Mode.TOPDP_NO_DECAY


@dataclass
class AgentStreams:
    """The four private random streams of one agent."""

    batch: np.random.Generator
    noise: np.random.Generator
    cover: np.random.Generator
    select: np.random.Generator

    @classmethod
    def for_agent(cls, master_seed: int, agent_id: AgentId) -> AgentStreams:
        return cls(
            batch=agent_rng(master_seed, agent_id, "batch"),
            noise=agent_rng(master_seed, agent_id, "noise"),
            cover=agent_rng(master_seed, agent_id, "cover"),
            select=agent_rng(master_seed, agent_id, "select"),
        )


@dataclass
class AgentState:
    """Everything one agent holds between rounds."""

    id: AgentId
    estimate: ModelParams
    schedule: NoiseSchedule
    budget: PrivacyBudget
    shard: Dataset
    streams: AgentStreams
    accountant: PrivacyAccountant
    neighbor_sigma0: dict[AgentId, float] = field(default_factory=dict)
    inbox: dict[AgentId, ModelParams] = field(default_factory=dict)
    last_pair: AgentId | None = None
    sigma_draws: list[float] = field(default_factory=list)
    messages_sent: int = 0

    @property
    def sigma0(self) -> float:
        return self.schedule.sigma0

    @property
    def spent_epsilon(self) -> float:
        return self.accountant.spent

    def sigma(self, t: int) -> float:
        return self.schedule.at(t)

    def neighbor_sigma(self, k: AgentId, t: int) -> float:
        """Decayed noise multiplier of neighbor ``k``, computed locally.

        Raises:
            ProtocolError: If ``k`` never announced its initial sigma
        """
        if k not in self.neighbor_sigma0:
            raise ProtocolError(f"No initial sigma received from agent {k}", agent_id=self.id)
        return NoiseSchedule(
            self.neighbor_sigma0[k], self.schedule.gamma, self.schedule.period
        ).at(t)

    def pop_mean_sigma(self) -> float:
        """Mean sigma drawn since the last call; 0.0 if nothing was drawn."""
        draws, self.sigma_draws = self.sigma_draws, []
        return float(np.mean(draws)) if draws else 0.0


def exchange_initial_sigmas(
    g: Graph, agents: Sequence[AgentState]
) -> list[dict[AgentId, float]]:
    """Give every agent the initial sigma of each of its neighbors."""
    maps: list[dict[AgentId, float]] = []
    for agent in agents:
        received = {k: agents[k].sigma0 for k in sorted(g.neighbors(agent.id))}
        agent.neighbor_sigma0 = received
        maps.append(received)
    return maps


def build_agents(
    g: Graph,
    shards: Sequence[Dataset],
    x0: ModelParams,
    budget: PrivacyBudget,
    iterations: int,
    *,
    gamma: float,
    period: int,
    master_seed: int,
    mode: Mode = Mode.TOPDP,
) -> list[AgentState]:
    """Create one agent per node, each with sigma0 calibrated to its shard.

    Every agent starts from a copy of ``x0``. Initial sigmas are exchanged
    before returning.
    """
    if len(shards) != g.n:
        raise ProtocolError(f"{len(shards)} shards for {g.n} agents")

    audit = get_audit_logger()
    agents = []
    for i, shard in enumerate(shards):
        sigma0 = calibrate_sigma0(budget, iterations, len(shard))
        if mode.decays:
            schedule = NoiseSchedule(sigma0, gamma, period)
        else:
            schedule = NoiseSchedule.constant(sigma0)
        audit.info(
            f"Agent {i} calibrated sigma0={sigma0!r} for |D|={len(shard)}, T={iterations}",
            extra={"agent_id": i},
        )
        agents.append(
            AgentState(
                id=i,
                estimate=x0.copy(),
                schedule=schedule,
                budget=budget,
                shard=shard,
                streams=AgentStreams.for_agent(master_seed, i),
                accountant=PrivacyAccountant(budget, sigma0, len(shard)),
            )
        )
    exchange_initial_sigmas(g, agents)
    logger.debug(f"Built {len(agents)} agents in mode {mode.value}")
    return agents
