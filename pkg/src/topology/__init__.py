"""Communication graphs, generators and the neighbor cover."""

from .cover import CoverPlan, cover_neighbors, coverable_fraction, non_adjacent_neighbors
from .generators import generate_named, generate_random
from .graph import (
    AgentId,
    Graph,
    format_edge_list,
    is_connected,
    parse_edge_list,
    read_edge_list,
    write_edge_list,
)

__all__ = [
    "AgentId",
    "CoverPlan",
    "Graph",
    "cover_neighbors",
    "coverable_fraction",
    "format_edge_list",
    "generate_named",
    "generate_random",
    "is_connected",
    "non_adjacent_neighbors",
    "parse_edge_list",
    "read_edge_list",
    "write_edge_list",
]
