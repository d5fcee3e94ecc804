"""Monte Carlo PageRank from terminating walks.

Every node launches its own coupled ensemble; the estimate of π_j is the share
of all walks that terminate at j. Walkers from different start nodes never
interact.
"""

from __future__ import annotations

from dataclasses import dataclass
import logging
from math import ceil

import numpy as np
from numpy.typing import NDArray

from .const import MAX_STEPS_FACTOR
from .errors import PreconditionError
from .graph import Graph, transition_matrix
from .oracles import pagerank_estimator_moments
from .walks import CouplingScheme, EnsembleConfig, RandomStreams, TerminationScheme, simulate_ensemble

_LOGGER = logging.getLogger(__name__)

# Slack on exact variance comparisons
VARIANCE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class PageRankEstimate:
    """Estimated PageRank vector with the settings that produced it."""

    values: NDArray[np.float64]
    walkers: int
    p_term: float
    coupling: CouplingScheme
    seed: int
    truncated: int = 0

    @property
    def total(self) -> float:
        """Sum of the estimate; truncated walks count where they stop, so this is 1 up to rounding."""
        return float(self.values.sum())


def estimate_pagerank(
    graph: Graph,
    p_term: float,
    walkers: int,
    coupling: CouplingScheme,
    streams: RandomStreams,
    *,
    termination: TerminationScheme = TerminationScheme.INDEPENDENT,
    max_steps: int | None = None,
) -> PageRankEstimate:
    """Estimate π with one ensemble of walkers per start node.

    A truncated walk counts as terminating where it was cut off.

    Raises:
        PreconditionError: p_term outside (0, 1).

    """
    if not 0 < p_term < 1:
        msg = f"Termination probability must lie in (0, 1), got {p_term}"
        raise PreconditionError(msg)
    n = graph.node_count
    config = EnsembleConfig(
        walkers=walkers,
        p_term=p_term,
        coupling=coupling,
        termination=termination,
        max_steps=max_steps,
        seed=streams.seed,
    )
    counts = np.zeros(n)
    truncated = 0
    for start in range(n):
        for walk in simulate_ensemble(graph, start, config, streams.generator(start)):
            counts[walk.end] += 1
            truncated += walk.truncated
    if truncated:
        _LOGGER.debug("%d of %d PageRank walks hit the %d-step cap", truncated, n * walkers, config.steps)
    return PageRankEstimate(
        values=counts / (n * walkers),
        walkers=walkers,
        p_term=p_term,
        coupling=coupling,
        seed=streams.seed,
        truncated=truncated,
    )


def _check_lengths(pi_exact: NDArray[np.float64], pi_hat: NDArray[np.float64]) -> None:
    if pi_exact.shape != pi_hat.shape:
        msg = f"PageRank vectors differ in shape: {pi_exact.shape} vs {pi_hat.shape}"
        raise PreconditionError(msg)


def pagerank_error(pi_exact: NDArray[np.float64], pi_hat: NDArray[np.float64]) -> float:
    """L2 norm ‖π − π̂‖₂."""
    _check_lengths(pi_exact, pi_hat)
    return float(np.linalg.norm(pi_exact - pi_hat))


def pagerank_squared_error(pi_exact: NDArray[np.float64], pi_hat: NDArray[np.float64]) -> float:
    """Squared L2 norm ‖π − π̂‖₂²."""
    _check_lengths(pi_exact, pi_hat)
    return float(((pi_exact - pi_hat) ** 2).sum())


def termination_distribution(graph: Graph, p_term: float) -> NDArray[np.float64]:
    """Q with Q_sj = P(a walk from s terminates at j) = p[(I − (1−p)P)^{-1}]_sj."""
    n = graph.node_count
    return p_term * np.linalg.solve(np.eye(n) - (1.0 - p_term) * transition_matrix(graph), np.eye(n))


def expected_squared_error_iid(graph: Graph, p_term: float, walkers: int) -> float:
    """E‖π − π̂‖² for i.i.d. walkers: Σ_s (1 − Σ_j Q_sj²) / (N² m)."""
    n = graph.node_count
    q = termination_distribution(graph, p_term)
    return float((1.0 - (q**2).sum(axis=1)).sum() / (n**2 * walkers))


def compare_pagerank_variance(
    graph: Graph,
    p_term: float,
    walkers: int,
    horizon: int | None = None,
) -> dict[CouplingScheme, NDArray[np.float64]]:
    """Exact per-node estimator variances for every coupling scheme.

    Logs a warning when full repulsion is worse than i.i.d. at some node;
    only transient repulsion is guaranteed not to be.
    """
    steps = horizon if horizon is not None else ceil(MAX_STEPS_FACTOR / p_term)
    variances = {
        coupling: pagerank_estimator_moments(graph, p_term, walkers, coupling, steps)[1] for coupling in CouplingScheme
    }
    worse = np.flatnonzero(variances[CouplingScheme.REPELLING] > variances[CouplingScheme.IID] + VARIANCE_TOLERANCE)
    if worse.size:
        _LOGGER.warning("Repelling PageRank variance exceeds i.i.d. at nodes %s", worse.tolist())
    return variances
