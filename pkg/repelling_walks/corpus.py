"""Small named graphs used as exact-oracle fixtures.

Each entry is an unweighted edge list on dense ids. The oracle corpus is the
set of graphs small enough for exhaustive enumeration of coupled walks.
"""

from __future__ import annotations

from .errors import GraphError
from .graph import Graph

# Private, use corpus_graph() to build a Graph
_CORPUS_EDGES: dict[str, tuple[tuple[int, int], ...]] = {
    "P2": ((0, 1),),
    "P3": ((0, 1), (1, 2)),
    "P4": ((0, 1), (1, 2), (2, 3)),
    "P5": ((0, 1), (1, 2), (2, 3), (3, 4)),
    "C4": ((0, 1), (1, 2), (2, 3), (3, 0)),
    "K3": ((0, 1), (1, 2), (0, 2)),
    "K4": ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)),
    "star-3": ((0, 1), (0, 2), (0, 3)),
    "star-4": ((0, 1), (0, 2), (0, 3), (0, 4)),
    "diamond": ((0, 1), (0, 2), (1, 2), (1, 3), (2, 3)),
}

# Graphs on which every coupling scheme is checked against enumeration
ORACLE_CORPUS: tuple[str, ...] = ("P3", "P5", "C4", "K3", "K4", "star-4")


def corpus_names() -> tuple[str, ...]:
    """Names of all corpus graphs."""
    return tuple(_CORPUS_EDGES)


def corpus_graph(name: str) -> Graph:
    """Build the named corpus graph."""
    try:
        edges = _CORPUS_EDGES[name]
    except KeyError as err:
        msg = f"Unknown corpus graph {name!r}"
        raise GraphError(msg) from err
    node_count = 1 + max(max(u, v) for u, v in edges)
    return Graph.from_edges(node_count, edges)
