"""Topology generators: random (Erdos-Renyi style) and named shapes."""

from __future__ import annotations

import logging

import networkx as nx
import numpy as np

from ..utils.exceptions import GraphGenerationError, ValidationError
from .graph import Graph, is_connected

logger = logging.getLogger(__name__)

DEFAULT_MAX_ATTEMPTS = 1000
NAMED_KINDS = ("ring", "star", "tree", "mesh", "complete", "random")


def generate_random(
    n: int,
    connection_rate: float,
    seed: int,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
) -> Graph:
    """Sample a connected graph where each pair is an edge with ``connection_rate``.

    Disconnected samples are discarded and the next sample is drawn from the
    same generator, so the result is a deterministic function of the inputs.

    Raises:
        ValidationError: If ``n < 2`` or the rate is outside (0, 1]
        GraphGenerationError: If no connected sample appears within
            ``max_attempts`` draws (the rate is too low for ``n``)
    """
    if n < 2:
        raise ValidationError("Need at least two agents", field_name="n", field_value=n)
    if not 0 < connection_rate <= 1:
        raise ValidationError(
            "connection_rate must be in (0, 1]",
            field_name="connection_rate",
            field_value=connection_rate,
        )
    rng = np.random.default_rng(seed)
    rows, cols = np.triu_indices(n, k=1)
    for attempt in range(1, max_attempts + 1):
        mask = rng.random(rows.size) < connection_rate
        graph = Graph.from_edges(n, zip(rows[mask].tolist(), cols[mask].tolist(), strict=True))
        if is_connected(graph):
            logger.debug(
                f"Random graph n={n} rate={connection_rate} connected after "
                f"{attempt} attempt(s), {graph.num_edges} edges"
            )
            return graph
    raise GraphGenerationError(
        f"could not generate connected graph with n={n}, "
        f"connection_rate={connection_rate} after {max_attempts} attempts",
        attempts=max_attempts,
    )


def _star_edges(n: int, hubs: int) -> list[tuple[int, int]]:
    # hubs form a clique; leaves attach round-robin
    edges = [(a, b) for a in range(hubs) for b in range(a + 1, hubs)]
    edges += [((leaf - hubs) % hubs, leaf) for leaf in range(hubs, n)]
    return edges


def _mesh_edges(n: int, density: float, seed: int) -> list[tuple[int, int]]:
    ring = {tuple(sorted(e)) for e in nx.cycle_graph(n).edges()}
    rng = np.random.default_rng(seed)
    chords = [
        (i, j)
        for i in range(n)
        for j in range(i + 1, n)
        if (i, j) not in ring
    ]
    keep = rng.random(len(chords)) < density
    return sorted(ring) + [c for c, k in zip(chords, keep, strict=True) if k]


def generate_named(
    kind: str,
    n: int,
    *,
    hubs: int = 1,
    branching: int = 2,
    density: float = 0.1,
    connection_rate: float = 0.2,
    seed: int = 0,
) -> Graph:
    """Build a deterministic graph of a named shape.

    Args:
        kind: ``ring``, ``star``, ``tree``, ``mesh``, ``complete`` or ``random``
        n: Number of agents
        hubs: Star only; number of hub agents (hubs are mutually connected)
        branching: Tree only; children per node of the complete tree
        density: Mesh only; probability of each extra chord on top of the ring
        connection_rate: Random only; pair inclusion probability
        seed: Seed for mesh chords and random graphs

    Raises:
        ValidationError: On an unknown kind or invalid parameters
    """
    if n < 2:
        raise ValidationError("Need at least two agents", field_name="n", field_value=n)
    if kind == "ring":
        edges = list(nx.cycle_graph(n).edges())
    elif kind == "star":
        if not 1 <= hubs < n:
            raise ValidationError(
                "Star hub count must be in [1, n)", field_name="hubs", field_value=hubs
            )
        edges = _star_edges(n, hubs)
    elif kind == "tree":
        if branching < 1:
            raise ValidationError(
                "Tree branching factor must be positive",
                field_name="branching",
                field_value=branching,
            )
        edges = list(nx.full_rary_tree(branching, n).edges())
    elif kind == "mesh":
        if not 0 <= density <= 1:
            raise ValidationError(
                "Mesh density must be in [0, 1]", field_name="density", field_value=density
            )
        edges = _mesh_edges(n, density, seed)
    elif kind == "complete":
        edges = list(nx.complete_graph(n).edges())
    elif kind == "random":
        return generate_random(n, connection_rate, seed)
    else:
        raise ValidationError(
            f"Unknown topology kind {kind!r}; expected one of {NAMED_KINDS}",
            field_name="kind",
            field_value=kind,
        )
    return Graph.from_edges(n, edges)
