"""Exact reference quantities computed with dense linear algebra.

This module contains the non-Monte-Carlo ground truth every estimator is scored
against: the regularised Laplacian kernel, PageRank, shortest-path
multiplicities and graphlet concentrations. These functions have no side
effects and can be tested in isolation.
"""

from __future__ import annotations

from collections import deque
import logging
from math import comb
from typing import NamedTuple

import networkx as nx
import numpy as np
from numpy.typing import NDArray

from .const import KERNEL_POWER, MAX_DENSE_NODES, PAGERANK_MAX_ITERATIONS, PAGERANK_TOLERANCE
from .errors import ConvergenceError, DimensionGuardError, PreconditionError
from .graph import Graph, normalized_adjacency, transition_matrix

_LOGGER = logging.getLogger(__name__)


class PathMultiplicity(NamedTuple):
    """Shortest-path length l_ij and the number M of distinct shortest paths."""

    length: int
    multiplicity: int


class TopologicalCondition(NamedTuple):
    """Outcome of the multiplicity condition for a node pair."""

    holds: bool
    lhs: float
    rhs: float


class GraphletConcentration(NamedTuple):
    """Triangle concentration with the underlying induced triad counts."""

    c_tri: float
    triangles: int
    wedges: int


def _require_dense(graph: Graph) -> None:
    if graph.node_count > MAX_DENSE_NODES:
        raise DimensionGuardError(graph.node_count, MAX_DENSE_NODES)


def kernel_shrinkage(sigma: float) -> float:
    """Scale c = σ²/(1+σ²) applied to W by the regularised Laplacian kernel."""
    if sigma <= 0:
        msg = f"sigma must be positive, got {sigma}"
        raise PreconditionError(msg)
    return sigma**2 / (1.0 + sigma**2)


def exact_kernel_lap(graph: Graph, sigma: float, d_power: int = KERNEL_POWER) -> NDArray[np.float64]:
    """Compute the d-regularised Laplacian kernel (I + σ²L̃)^{-d}.

    Uses the rescaled form (1+σ²)^{-d}(I − cW)^{-d} with c = σ²/(1+σ²) and
    applies d successive dense solves.

    Args:
        graph: Graph supplying the normalised adjacency W.
        sigma: Kernel regulariser, must be positive.
        d_power: Power of the resolvent, at least 1.

    Returns:
        Symmetric positive definite N×N kernel matrix.

    Raises:
        DimensionGuardError: Graph above the dense-computation limit.
        PreconditionError: Non-positive sigma or d_power.

    """
    _require_dense(graph)
    if d_power < 1:
        msg = f"d_power must be at least 1, got {d_power}"
        raise PreconditionError(msg)
    c = kernel_shrinkage(sigma)
    n = graph.node_count
    system = np.eye(n) - c * normalized_adjacency(graph)
    kernel = np.eye(n)
    for _ in range(d_power):
        kernel = np.linalg.solve(system, kernel)
    return kernel / (1.0 + sigma**2) ** d_power


def truncated_neumann_kernel(graph: Graph, sigma: float, terms: int) -> NDArray[np.float64]:
    """Partial sum (1+σ²)^{-2} Σ_{k≤terms} (k+1) c^k W^k of the 2-regularised kernel."""
    _require_dense(graph)
    c = kernel_shrinkage(sigma)
    n = graph.node_count
    scaled = c * normalized_adjacency(graph)
    power = np.eye(n)
    total = np.zeros((n, n))
    for k in range(terms + 1):
        total += (k + 1) * power
        power = power @ scaled
    return total / (1.0 + sigma**2) ** 2


def neumann_truncation_bound(sigma: float, terms: int) -> float:
    """Max-norm bound (T+2)c^{T+1}/(1−c)² on the unscaled series remainder."""
    c = kernel_shrinkage(sigma)
    return (terms + 2) * c ** (terms + 1) / (1.0 - c) ** 2


def exact_pagerank(graph: Graph, p_teleport: float) -> NDArray[np.float64]:
    """Stationary distribution of the teleporting walk by power iteration.

    Iterates πᵀ ← πᵀ((1−p)P + (p/N)E) until the infinity-norm residual drops
    below PAGERANK_TOLERANCE.

    Raises:
        PreconditionError: p_teleport outside (0, 1).
        ConvergenceError: Residual still above tolerance after the iteration cap.

    """
    _require_dense(graph)
    if not 0 < p_teleport < 1:
        msg = f"Teleport probability must lie in (0, 1), got {p_teleport}"
        raise PreconditionError(msg)
    n = graph.node_count
    propagate = (1.0 - p_teleport) * transition_matrix(graph).T
    pi = np.full(n, 1.0 / n)
    residual = np.inf
    for iteration in range(1, PAGERANK_MAX_ITERATIONS + 1):
        updated = propagate @ pi + (p_teleport / n) * pi.sum()
        residual = float(np.abs(updated - pi).max())
        pi = updated
        if residual < PAGERANK_TOLERANCE:
            _LOGGER.debug("PageRank converged after %d iterations", iteration)
            return pi / pi.sum()
    raise ConvergenceError(PAGERANK_MAX_ITERATIONS, residual)


def shortest_path_counts(graph: Graph, source: int) -> tuple[list[int], list[int]]:
    """BFS distances and shortest-path counts from a source node.

    Returns:
        Tuple of (distance per node, number of shortest paths per node).

    """
    n = graph.node_count
    dist = [-1] * n
    count = [0] * n
    dist[source] = 0
    count[source] = 1
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in graph.neighbors(u):
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
            if dist[v] == dist[u] + 1:
                count[v] += count[u]
    return dist, count


def shortest_path_multiplicity(graph: Graph, i: int, j: int) -> PathMultiplicity:
    """Length and multiplicity of the shortest paths between i and j."""
    dist, count = shortest_path_counts(graph, i)
    return PathMultiplicity(dist[j], count[j])


def check_topological_condition(graph: Graph, i: int, j: int) -> TopologicalCondition:
    """Evaluate the shortest-path multiplicity condition for a node pair.

    lhs = M(l_ij)². rhs sums M(l_{i'j'})·M(l_{i''j''}) over neighbour pairs
    i' ≠ i'' of i and j' ≠ j'' of j whose distances both equal l_ij − 2,
    scaled by d_i d_j / ((d_i − 1)(d_j − 1)). A degree-1 endpoint leaves the
    sum empty, so rhs = 0.

    Raises:
        PreconditionError: l_ij < 2.

    """
    length, multiplicity = shortest_path_multiplicity(graph, i, j)
    if length < 2:  # noqa: PLR2004
        msg = f"Condition needs nodes at distance >= 2, got l({i},{j}) = {length}"
        raise PreconditionError(msg)
    lhs = float(multiplicity**2)
    d_i, d_j = graph.degree(i), graph.degree(j)
    if d_i == 1 or d_j == 1:
        return TopologicalCondition(holds=True, lhs=lhs, rhs=0.0)

    target = length - 2
    # counts[a][b] = M(l_{i'j'}) when l_{i'j'} hits the target length, else 0
    counts: list[list[int]] = []
    for i_prime in graph.neighbors(i):
        dist, paths = shortest_path_counts(graph, i_prime)
        counts.append([paths[j_prime] if dist[j_prime] == target else 0 for j_prime in graph.neighbors(j)])

    total = sum(sum(row) for row in counts)
    row_sq = sum(sum(row) ** 2 for row in counts)
    col_sq = sum(sum(column) ** 2 for column in zip(*counts, strict=True))
    cell_sq = sum(value**2 for row in counts for value in row)
    distinct_pairs = total**2 - row_sq - col_sq + cell_sq

    rhs = d_i * d_j / ((d_i - 1) * (d_j - 1)) * distinct_pairs
    return TopologicalCondition(holds=lhs >= rhs, lhs=lhs, rhs=rhs)


def exact_graphlet_concentration(graph: Graph) -> GraphletConcentration:
    """Triangle concentration among connected 3-node induced subgraphs.

    Raises:
        PreconditionError: The graph has no connected triads at all.

    """
    triangles = sum(nx.triangles(graph.to_networkx()).values()) // 3
    open_or_closed = sum(comb(int(d), 2) for d in graph.degrees)
    wedges = open_or_closed - 3 * triangles
    if triangles + wedges == 0:
        msg = "Graph has no connected 3-node subgraphs"
        raise PreconditionError(msg)
    return GraphletConcentration(triangles / (triangles + wedges), triangles, wedges)
