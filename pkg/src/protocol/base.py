"""Shared machinery of the synchronous and asynchronous round engines."""

from __future__ import annotations

import logging
import math
from abc import ABC, abstractmethod
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

import numpy as np

from ..learning.data import Dataset, draw_batch
from ..learning.models import Model, ModelParams, evaluate_accuracy
from ..learning.updates import LearningConfig, clip_gradient
from ..models.trace import Message, TraceRecord, TrainingTrace
from ..privacy.mechanism import sample_noise
from ..topology.graph import Graph, is_connected
from ..utils.exceptions import DimensionMismatchError, ProtocolError, TopologyError
from .agent import AgentState, Mode

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

RecordCallback = Callable[[list[TraceRecord]], None]


class RoundEngine(ABC):
    """Drives agents through T rounds and collects the trace.

    Subclasses implement ``_round``. Per-agent work may be fanned out over a
    thread pool; results are always consumed in agent order so the trace is
    the same for any worker count.
    """

    name = ""
    broadcast_initial = True

    def __init__(
        self,
        g: Graph,
        agents: Sequence[AgentState],
        model: Model,
        cfg: LearningConfig,
        mode: Mode,
        testset: Dataset,
        *,
        eval_every: int | None = None,
        workers: int = 1,
        record_messages: bool = False,
        on_record: RecordCallback | None = None,
    ):
        self.g = g
        self.agents = list(agents)
        self.model = model
        self.cfg = cfg
        self.mode = mode
        self.testset = testset
        self.eval_every = eval_every or self._default_eval_every()
        self.workers = max(1, workers)
        self.record_messages = record_messages
        self.on_record = on_record
        self.trace = TrainingTrace()
        self._executor: ThreadPoolExecutor | None = None

    def _default_eval_every(self) -> int:
        shard = min(len(a.shard) for a in self.agents) if self.agents else 1
        return max(1, shard // self.cfg.batch_size)

    def validate(self) -> None:
        """Check the preconditions shared by both protocols.

        Raises:
            TopologyError: If the graph is disconnected or too small
            ProtocolError: If agents and nodes disagree or sigmas were not exchanged
            DimensionMismatchError: If estimates differ in length
        """
        if self.g.n < 2:
            raise TopologyError("At least two agents are required")
        if not is_connected(self.g):
            raise TopologyError("Graph is not connected")
        if [a.id for a in self.agents] != list(range(self.g.n)):
            raise ProtocolError(f"Agents must be numbered 0..{self.g.n - 1} in order")
        for agent in self.agents:
            if set(agent.neighbor_sigma0) != set(self.g.neighbors(agent.id)):
                raise ProtocolError("Initial sigma exchange incomplete", agent_id=agent.id)
            if agent.estimate.shape != (self.model.num_params,):
                raise DimensionMismatchError(
                    f"Agent {agent.id} estimate has shape {agent.estimate.shape}",
                    expected=self.model.num_params,
                    actual=int(agent.estimate.size),
                )

    def run(self, iterations: int) -> TrainingTrace:
        """Execute the initial step then ``iterations`` rounds."""
        if iterations < 1:
            raise ProtocolError("iterations must be at least 1")
        self.validate()
        self.trace = TrainingTrace(
            metadata={"protocol": self.name, "mode": self.mode.value, "iterations": iterations}
        )
        logger.info(
            f"Running {self.name} protocol ({self.mode.value}) on {self.g.n} agents "
            f"for {iterations} iterations"
        )
        if self.workers > 1:
            self._executor = ThreadPoolExecutor(max_workers=self.workers)
        try:
            self._initial_step()
            for t in range(iterations):
                self._round(t)
                if (t + 1) % self.eval_every == 0 or t + 1 == iterations:
                    self._record(t + 1)
        finally:
            if self._executor is not None:
                self._executor.shutdown()
                self._executor = None
        return self.trace

    @abstractmethod
    def _round(self, t: int) -> None:
        """Advance every agent by one iteration."""

    def _map(self, fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
        if self._executor is None:
            return [fn(item) for item in items]
        return list(self._executor.map(fn, items))

    def _sigma(self, agent: AgentState, t: int) -> float:
        return agent.sigma(t) if self.mode.adds_noise else 0.0

    def _clipped_gradient(self, agent: AgentState, params: ModelParams) -> ModelParams:
        batch = draw_batch(agent.shard, self.cfg.batch_size, agent.streams.batch)
        return clip_gradient(self.model.gradient(params, batch), self.cfg.clip_c)

    def _noise(self, agent: AgentState, sigma: float) -> ModelParams:
        agent.sigma_draws.append(sigma)
        return sample_noise(self.model.num_params, sigma * self.cfg.clip_c, agent.streams.noise)

    def _initial_step(self) -> None:
        """x = x0 - lambda0 * g(x0) + G(sigma0), broadcast to all neighbors if enabled."""

        def step(agent: AgentState) -> list[Message]:
            sigma = self._sigma(agent, 0)
            gbar = self._clipped_gradient(agent, agent.estimate)
            agent.estimate = agent.estimate - self.cfg.lambda0 * gbar + self._noise(agent, sigma)
            if not self.broadcast_initial:
                return []
            return [
                Message(agent.id, j, -1, agent.estimate, sigma, sigma)
                for j in sorted(self.g.neighbors(agent.id))
            ]

        for messages in self._map(step, self.agents):
            self._deliver(messages)

    def _deliver(self, messages: Iterable[Message]) -> None:
        for msg in messages:
            if not self.g.has_edge(msg.sender, msg.recipient):
                raise ProtocolError(
                    f"Message to non-neighbor {msg.recipient}", agent_id=msg.sender
                )
            self.agents[msg.recipient].inbox[msg.sender] = msg.payload
            self.agents[msg.sender].messages_sent += 1
            if self.record_messages:
                self.trace.messages.append(msg)

    def _check_finite(self, agent: AgentState) -> None:
        if not np.all(np.isfinite(agent.estimate)):
            raise ProtocolError("Estimate became non-finite", agent_id=agent.id)

    def _record(self, iteration: int) -> None:
        def evaluate(agent: AgentState) -> float:
            return evaluate_accuracy(self.model, agent.estimate, self.testset)

        accuracies = self._map(evaluate, self.agents)
        records = [
            TraceRecord(
                iteration=iteration,
                agent_id=agent.id,
                accuracy=acc,
                spent_epsilon=agent.spent_epsilon if self.mode.adds_noise else math.inf,
                mean_sigma=agent.pop_mean_sigma(),
                messages_sent=agent.messages_sent,
            )
            for agent, acc in zip(self.agents, accuracies)
        ]
        self.trace.records.extend(records)
        logger.debug(
            f"Iteration {iteration}: mean accuracy {np.mean(accuracies):.4f}",
            extra={"iteration": iteration},
        )
        if self.on_record is not None:
            self.on_record(records)
