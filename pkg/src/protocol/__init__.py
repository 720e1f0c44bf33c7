"""Agents and the round engines of the two protocols."""

from .agent import AgentState, AgentStreams, Mode, build_agents, exchange_initial_sigmas
from .asynchronous import AsynchronousEngine, pair_round, run_asynchronous
from .audit import Violation, audit_messages
from .base import RoundEngine
from .synchronous import SynchronousEngine, run_synchronous

__all__ = [
    "AgentState",
    "AgentStreams",
    "AsynchronousEngine",
    "Mode",
    "RoundEngine",
    "SynchronousEngine",
    "Violation",
    "audit_messages",
    "build_agents",
    "exchange_initial_sigmas",
    "pair_round",
    "run_asynchronous",
    "run_synchronous",
]
