"""Master-seed splitting.

Every random stream in an experiment is derived from the master seed as
``SeedSequence(entropy=master_seed, spawn_key=(purpose, *keys))`` where
``purpose`` is the index of the stream's name in ``PURPOSES``. Streams for
different purposes never share state, so a sweep that changes one factor
(e.g. alpha) keeps the graph, data split, initial estimate and every agent's
batches identical.
"""

from __future__ import annotations

import numpy as np

PURPOSES = ("graph", "partition", "init", "agents", "scheduler", "data")

# per-agent streams, keyed (agent_id, stream index)
AGENT_STREAMS = ("batch", "noise", "cover", "select")


def seed_sequence(master_seed: int, purpose: str, *keys: int) -> np.random.SeedSequence:
    """Return the seed sequence for ``purpose`` (and optional sub-keys)."""
    if purpose not in PURPOSES:
        raise ValueError(f"Unknown seed purpose: {purpose}")
    return np.random.SeedSequence(
        entropy=master_seed, spawn_key=(PURPOSES.index(purpose), *keys)
    )


def child_rng(master_seed: int, purpose: str, *keys: int) -> np.random.Generator:
    """Return an independent generator for ``purpose``."""
    return np.random.default_rng(seed_sequence(master_seed, purpose, *keys))


def child_seed(master_seed: int, purpose: str, *keys: int) -> int:
    """Return a plain integer seed for APIs that take one."""
    return int(seed_sequence(master_seed, purpose, *keys).generate_state(1)[0])


def agent_rng(master_seed: int, agent_id: int, stream: str) -> np.random.Generator:
    """Return one of the four private streams of an agent."""
    return child_rng(master_seed, "agents", agent_id, AGENT_STREAMS.index(stream))
