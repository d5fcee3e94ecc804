"""Triangle concentration from random walk triples.

Consecutive triples (X_i, X_{i+1}, X_{i+2}) of a simple random walk visit each
ordered, non-backtracking triple centred on b with stationary probability
proportional to 1/d_b. Reweighting every wedge by d_b/2 and every triangle by
d_b/6 (a triangle is seen as six ordered triples, a wedge as two) makes the
weighted triangle share an estimate of the triangle concentration. Triples
that return to their first node are discarded.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from enum import StrEnum
import logging

from .const import MIN_WALK_LENGTH
from .errors import NonEdgeError, PreconditionError
from .graph import Graph
from .walks import CouplingScheme, EnsembleConfig, RandomStreams, simulate_ensemble

_LOGGER = logging.getLogger(__name__)


class ThreeNodeState(StrEnum):
    """Induced subgraph of three consecutive walk nodes."""

    WEDGE = "wedge"
    TRIANGLE = "triangle"
    DISCARD = "discard"


def classify_3_state(graph: Graph, triple: tuple[int, int, int]) -> ThreeNodeState:
    """Classify walk nodes (a, b, c): a backtrack, a closed triangle or an open wedge.

    Raises:
        NonEdgeError: (a, b) or (b, c) is not an edge.

    """
    a, b, c = triple
    for u, v in ((a, b), (b, c)):
        if not graph.has_edge(u, v):
            raise NonEdgeError(u, v)
    if a == c:
        return ThreeNodeState.DISCARD
    if graph.has_edge(a, c):
        return ThreeNodeState.TRIANGLE
    return ThreeNodeState.WEDGE


@dataclass
class GraphletTally:
    """Degree-weighted wedge and triangle counts pooled over walks."""

    c_wed: float = 0.0
    c_tri: float = 0.0
    discarded: int = 0
    states_seen: int = 0

    def add_walk(self, graph: Graph, nodes: Sequence[int]) -> None:
        """Classify every consecutive triple of one walk."""
        for a, b, c in zip(nodes, nodes[1:], nodes[2:], strict=False):
            self.states_seen += 1
            state = classify_3_state(graph, (a, b, c))
            if state is ThreeNodeState.DISCARD:
                self.discarded += 1
            elif state is ThreeNodeState.TRIANGLE:
                self.c_tri += graph.degree(b) / 6
            else:
                self.c_wed += graph.degree(b) / 2

    @property
    def classified(self) -> int:
        """Triples that were not discarded."""
        return self.states_seen - self.discarded

    def concentration(self) -> float | None:
        """Weighted triangle share, or None when every triple was discarded."""
        total = self.c_tri + self.c_wed
        if total == 0:
            return None
        return self.c_tri / total


@dataclass(frozen=True)
class TriangleSample:
    """One trial's estimate; value is None for an invalid (all-discarded) trial."""

    trial: int
    start: int
    tally: GraphletTally
    value: float | None

    @property
    def valid(self) -> bool:
        """Whether the trial produced an estimate."""
        return self.value is not None


def estimate_triangle_concentration(
    graph: Graph,
    walk_length: int,
    walkers: int,
    coupling: CouplingScheme,
    trials: int,
    streams: RandomStreams,
) -> list[TriangleSample]:
    """Run independent trials of m walkers visiting walk_length nodes each.

    Every trial picks one start node uniformly at random for all of its
    walkers, runs them for walk_length − 1 moves without termination and pools
    the tallies of all walkers.

    Raises:
        PreconditionError: walk_length below 3 or fewer than one trial.

    """
    if walk_length < MIN_WALK_LENGTH:
        msg = f"Walk length must be at least {MIN_WALK_LENGTH}, got {walk_length}"
        raise PreconditionError(msg)
    if trials < 1:
        msg = f"Need at least one trial, got {trials}"
        raise PreconditionError(msg)

    config = EnsembleConfig(walkers=walkers, p_term=0.0, coupling=coupling, max_steps=walk_length - 1)
    samples: list[TriangleSample] = []
    for trial in range(trials):
        rng = streams.generator(trial)
        start = int(rng.integers(graph.node_count))
        tally = GraphletTally()
        for walk in simulate_ensemble(graph, start, config, rng):
            tally.add_walk(graph, walk.nodes)
        samples.append(TriangleSample(trial=trial, start=start, tally=tally, value=tally.concentration()))

    invalid = sum(not sample.valid for sample in samples)
    if invalid:
        _LOGGER.warning("%d of %d graphlet trials discarded every triple", invalid, trials)
    return samples
