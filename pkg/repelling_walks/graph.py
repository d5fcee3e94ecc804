"""Immutable undirected graph representation and text-format loaders."""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Sequence
import logging
import math
from pathlib import Path

import networkx as nx
import numpy as np
from numpy.typing import NDArray

from .errors import DisconnectedGraphError, EdgeListParseError, GraphError

_LOGGER = logging.getLogger(__name__)

_COMMENT = "#"

type Edge = tuple[int, int] | tuple[int, int, float]


class Graph:
    """Weighted, undirected, connected simple graph in adjacency-list form.

    Neighbour lists are sorted by node id and stored as tuples so they can be
    indexed directly by the walk engine. Degree arrays are computed once and
    marked read-only; a Graph is never mutated after construction and can be
    shared freely between threads and worker processes.
    """

    __slots__ = (
        "_degrees",
        "_label_index",
        "_labels",
        "_neighbor_sets",
        "_neighbors",
        "_weighted_degrees",
        "_weights",
    )

    def __init__(
        self,
        adjacency: Sequence[Sequence[tuple[int, float]]],
        labels: Sequence[str] | None = None,
    ) -> None:
        """Initialize from per-node (neighbour, weight) lists.

        Args:
            adjacency: For each node, its incident (neighbour, weight) pairs.
            labels: Optional external node labels (defaults to str(node id)).

        Raises:
            GraphError: Asymmetric, self-looped, duplicated or non-positive edges.
            DisconnectedGraphError: More than one connected component.

        """
        node_count = len(adjacency)
        if node_count < 2:  # noqa: PLR2004
            msg = f"Graph needs at least two nodes, got {node_count}"
            raise GraphError(msg)

        neighbors: list[tuple[int, ...]] = []
        weights: list[tuple[float, ...]] = []
        for node, incident in enumerate(adjacency):
            ordered = sorted(incident)
            ids = tuple(int(v) for v, _ in ordered)
            if len(set(ids)) != len(ids):
                msg = f"Node {node} has duplicate edges"
                raise GraphError(msg)
            if node in ids:
                msg = f"Node {node} has a self-loop"
                raise GraphError(msg)
            if any(v < 0 or v >= node_count for v in ids):
                msg = f"Node {node} references a neighbour outside 0..{node_count - 1}"
                raise GraphError(msg)
            edge_weights = tuple(float(w) for _, w in ordered)
            if any(not math.isfinite(w) or w <= 0 for w in edge_weights):
                msg = f"Node {node} has a non-positive or non-finite edge weight"
                raise GraphError(msg)
            neighbors.append(ids)
            weights.append(edge_weights)

        self._neighbors: tuple[tuple[int, ...], ...] = tuple(neighbors)
        self._weights: tuple[tuple[float, ...], ...] = tuple(weights)
        self._neighbor_sets: tuple[frozenset[int], ...] = tuple(frozenset(ids) for ids in neighbors)

        for u in range(node_count):
            for v, w in zip(self._neighbors[u], self._weights[u], strict=True):
                if self.weight(v, u) != w:
                    msg = f"Edge ({u}, {v}) is not symmetric"
                    raise GraphError(msg)

        if labels is None:
            labels = [str(node) for node in range(node_count)]
        if len(labels) != node_count:
            msg = f"Expected {node_count} labels, got {len(labels)}"
            raise GraphError(msg)
        self._labels: tuple[str, ...] = tuple(labels)
        self._label_index: dict[str, int] = {label: node for node, label in enumerate(self._labels)}

        degrees = np.array([len(ids) for ids in neighbors], dtype=np.int64)
        degrees.setflags(write=False)
        self._degrees = degrees
        weighted = np.array([sum(ws) for ws in weights], dtype=np.float64)
        weighted.setflags(write=False)
        self._weighted_degrees = weighted

        components = nx.number_connected_components(self.to_networkx())
        if components != 1:
            raise DisconnectedGraphError(components)

    @classmethod
    def from_edges(
        cls,
        node_count: int,
        edges: Iterable[Edge],
        labels: Sequence[str] | None = None,
    ) -> Graph:
        """Build a graph from an undirected edge list (weights default to 1.0)."""
        adjacency: list[list[tuple[int, float]]] = [[] for _ in range(node_count)]
        for edge in edges:
            u, v = edge[0], edge[1]
            w = edge[2] if len(edge) == 3 else 1.0  # noqa: PLR2004
            adjacency[u].append((v, w))
            adjacency[v].append((u, w))
        return cls(adjacency, labels)

    def __repr__(self) -> str:
        """Return a compact summary."""
        return f"Graph(nodes={self.node_count}, edges={self.edge_count})"

    def __eq__(self, other: object) -> bool:
        """Graphs are equal when structure, weights and labels match."""
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self._neighbors == other._neighbors and self._weights == other._weights and self._labels == other._labels
        )

    def __hash__(self) -> int:
        """Hash on structure and weights."""
        return hash((self._neighbors, self._weights))

    @property
    def node_count(self) -> int:
        """Number of nodes N."""
        return len(self._neighbors)

    @property
    def edge_count(self) -> int:
        """Number of undirected edges."""
        return int(self._degrees.sum()) // 2

    @property
    def labels(self) -> tuple[str, ...]:
        """External node labels indexed by node id."""
        return self._labels

    @property
    def degrees(self) -> NDArray[np.int64]:
        """Unweighted degrees d_i (read-only)."""
        return self._degrees

    @property
    def weighted_degrees(self) -> NDArray[np.float64]:
        """Weighted degrees, the sum of incident edge weights (read-only)."""
        return self._weighted_degrees

    @property
    def max_degree(self) -> int:
        """Largest unweighted degree."""
        return int(self._degrees.max())

    @property
    def is_unit_weight(self) -> bool:
        """Whether every edge weight equals 1.0."""
        return all(w == 1.0 for ws in self._weights for w in ws)

    def degree(self, node: int) -> int:
        """Unweighted degree of a node."""
        return len(self._neighbors[node])

    def neighbors(self, node: int) -> tuple[int, ...]:
        """Sorted neighbour ids of a node."""
        return self._neighbors[node]

    def neighbor_weights(self, node: int) -> tuple[float, ...]:
        """Edge weights aligned with neighbors(node)."""
        return self._weights[node]

    def has_edge(self, u: int, v: int) -> bool:
        """Whether (u, v) is an edge."""
        return v in self._neighbor_sets[u]

    def weight(self, u: int, v: int) -> float:
        """Weight of edge (u, v), or 0.0 when absent."""
        if not self.has_edge(u, v):
            return 0.0
        return self._weights[u][self._neighbors[u].index(v)]

    def node_of(self, label: str) -> int:
        """Node id for an external label."""
        try:
            return self._label_index[label]
        except KeyError as err:
            msg = f"Unknown node label {label!r}"
            raise GraphError(msg) from err

    def edges(self) -> Iterator[tuple[int, int, float]]:
        """Iterate each undirected edge once as (u, v, weight) with u < v."""
        for u, (ids, ws) in enumerate(zip(self._neighbors, self._weights, strict=True)):
            for v, w in zip(ids, ws, strict=True):
                if u < v:
                    yield u, v, w

    def to_networkx(self) -> nx.Graph:
        """Convert to a networkx graph with integer nodes and 'weight' attributes."""
        g = nx.Graph()
        g.add_nodes_from(range(self.node_count))
        g.add_weighted_edges_from(self.edges())
        return g


# =============================================================================
# Loaders
# =============================================================================


def load_edge_list(text: str) -> Graph:
    """Parse an edge list.

    Each non-comment line is "u v" or "u v w". Labels are arbitrary strings
    mapped to dense ids in first-appearance order; the weight defaults to 1.0.

    Raises:
        EdgeListParseError: Malformed line, self-loop, bad weight or duplicate edge.
        DisconnectedGraphError: The edges do not form a connected graph.

    """
    label_index: dict[str, int] = {}
    edges: list[tuple[int, int, float]] = []
    seen: set[tuple[int, int]] = set()

    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split(_COMMENT, 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            msg = f"expected 'u v' or 'u v w', got {line!r}"
            raise EdgeListParseError(msg, line_number)
        if parts[0] == parts[1]:
            msg = f"self-loop on node {parts[0]!r}"
            raise EdgeListParseError(msg, line_number)

        weight = 1.0
        if len(parts) == 3:  # noqa: PLR2004
            try:
                weight = float(parts[2])
            except ValueError as err:
                msg = f"invalid weight {parts[2]!r}"
                raise EdgeListParseError(msg, line_number) from err
            if not math.isfinite(weight) or weight <= 0:
                msg = f"edge weight must be positive, got {parts[2]!r}"
                raise EdgeListParseError(msg, line_number)

        u = label_index.setdefault(parts[0], len(label_index))
        v = label_index.setdefault(parts[1], len(label_index))
        key = (min(u, v), max(u, v))
        if key in seen:
            msg = f"duplicate edge {parts[0]} {parts[1]}"
            raise EdgeListParseError(msg, line_number)
        seen.add(key)
        edges.append((u, v, weight))

    _LOGGER.debug("Parsed edge list with %d nodes and %d edges", len(label_index), len(edges))
    return Graph.from_edges(len(label_index), edges, labels=list(label_index))


def read_edge_list(path: Path) -> Graph:
    """Load an edge-list file from disk."""
    return load_edge_list(path.read_text(encoding="utf-8"))


def load_node_attributes(text: str, graph: Graph) -> NDArray[np.float64]:
    """Parse a node-attribute file into an (N, k) matrix.

    Each non-comment line is "node v1 v2 ... vk" where node is a label of the
    graph. Every node must appear exactly once and k must be fixed.

    Raises:
        EdgeListParseError: Unknown node, ragged rows, bad numbers or missing nodes.

    """
    rows: dict[int, list[float]] = {}
    dim: int | None = None
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split(_COMMENT, 1)[0].strip()
        if not line:
            continue
        label, *values = line.split()
        if not values:
            msg = f"node {label!r} has no attribute values"
            raise EdgeListParseError(msg, line_number)
        if dim is None:
            dim = len(values)
        elif len(values) != dim:
            msg = f"expected {dim} attribute values, got {len(values)}"
            raise EdgeListParseError(msg, line_number)
        try:
            node = graph.node_of(label)
            vector = [float(value) for value in values]
        except (GraphError, ValueError) as err:
            raise EdgeListParseError(str(err), line_number) from err
        if node in rows:
            msg = f"node {label!r} listed twice"
            raise EdgeListParseError(msg, line_number)
        rows[node] = vector

    missing = graph.node_count - len(rows)
    if dim is None or missing:
        msg = f"{missing} nodes have no attributes"
        raise EdgeListParseError(msg, 0)
    return np.array([rows[node] for node in range(graph.node_count)], dtype=np.float64)


# =============================================================================
# Dense matrices
# =============================================================================


def adjacency_matrix(graph: Graph, *, weighted: bool = True) -> NDArray[np.float64]:
    """Dense adjacency matrix A = [a_ij] (or its 0/1 pattern when weighted is False)."""
    n = graph.node_count
    matrix = np.zeros((n, n), dtype=np.float64)
    for u, v, w in graph.edges():
        value = w if weighted else 1.0
        matrix[u, v] = value
        matrix[v, u] = value
    return matrix


def transition_matrix(graph: Graph) -> NDArray[np.float64]:
    """Simple random walk transition matrix, P_ij = 1/d_i on edges."""
    n = graph.node_count
    matrix = np.zeros((n, n), dtype=np.float64)
    for node in range(n):
        nbrs = list(graph.neighbors(node))
        matrix[node, nbrs] = 1.0 / len(nbrs)
    return matrix


def normalized_adjacency(graph: Graph) -> NDArray[np.float64]:
    """Normalised weighted adjacency W_ij = a_ij / sqrt(d̃_i d̃_j)."""
    scale = 1.0 / np.sqrt(graph.weighted_degrees)
    return adjacency_matrix(graph) * np.outer(scale, scale)
