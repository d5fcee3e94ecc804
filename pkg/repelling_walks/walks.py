"""Synchronous simulation of coupled random walker ensembles.

Walkers launched together from one node advance in lock-step. Before each move
every live walker may terminate; survivors sharing a node are then either moved
independently or, when the coupling is active, shuffled into degree-sized
blocks whose members are sent to distinct neighbours. Every walker's marginal
law is the simple random walk with geometric termination in all schemes.
"""

from __future__ import annotations

from collections import defaultdict
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from enum import StrEnum
import logging
from math import ceil, comb

import numpy as np

from .const import (
    MAX_STEPS_FACTOR,
    SCHEME_ANTITHETIC,
    SCHEME_ANTITHETIC_REPELLING,
    SCHEME_IID,
    SCHEME_REPELLING,
    SCHEME_TRANSIENT,
)
from .errors import BlockAssignmentError, EnsembleConfigError
from .graph import Graph

_LOGGER = logging.getLogger(__name__)


class CouplingScheme(StrEnum):
    """How co-located walkers choose their next node."""

    IID = "iid"
    REPELLING = "repelling"
    TRANSIENT_REPELLING = "transient"

    def active_at(self, step: int) -> bool:
        """Whether moves at this timestep are coupled."""
        if self is CouplingScheme.REPELLING:
            return True
        if self is CouplingScheme.TRANSIENT_REPELLING:
            return step == 0
        return False


class TerminationScheme(StrEnum):
    """How walker termination events are correlated."""

    INDEPENDENT = "independent"
    ANTITHETIC = "antithetic"


@dataclass(frozen=True, slots=True)
class RandomStreams:
    """Splittable counter-based random streams.

    The stream at key path (k1, k2, ...) is
    default_rng(SeedSequence(entropy=seed, spawn_key=(k1, k2, ...))), so any
    work item can rebuild its generator from its keys alone and results do not
    depend on which worker ran it or in which order.
    """

    seed: int
    path: tuple[int, ...] = ()

    def child(self, *keys: int) -> RandomStreams:
        """Streams rooted one or more levels below this one."""
        return RandomStreams(self.seed, self.path + keys)

    def generator(self, *keys: int) -> np.random.Generator:
        """Generator for the given sub-key path."""
        return np.random.default_rng(np.random.SeedSequence(entropy=self.seed, spawn_key=self.path + keys))


@dataclass(frozen=True, slots=True)
class EnsembleConfig:
    """Parameters of one coupled ensemble.

    p_term = 0 selects the fixed-budget mode: walkers never terminate and run
    for exactly max_steps moves, which must then be given explicitly.
    """

    walkers: int
    p_term: float
    coupling: CouplingScheme = CouplingScheme.IID
    termination: TerminationScheme = TerminationScheme.INDEPENDENT
    max_steps: int | None = None
    seed: int = 0
    steps: int = field(init=False)

    def __post_init__(self) -> None:
        """Validate and resolve the default length cap."""
        if self.walkers < 1:
            msg = f"Ensemble needs at least one walker, got {self.walkers}"
            raise EnsembleConfigError(msg)
        if not 0 <= self.p_term < 1:
            msg = f"Termination probability must lie in [0, 1), got {self.p_term}"
            raise EnsembleConfigError(msg)
        if self.max_steps is not None and self.max_steps < 1:
            msg = f"max_steps must be at least 1, got {self.max_steps}"
            raise EnsembleConfigError(msg)
        if self.p_term == 0 and self.max_steps is None:
            msg = "Fixed-budget walks (p_term = 0) need an explicit max_steps"
            raise EnsembleConfigError(msg)
        if self.termination is TerminationScheme.ANTITHETIC and self.walkers % 2:
            _LOGGER.debug("Antithetic termination with %d walkers leaves one walker unpaired", self.walkers)
        steps = self.max_steps if self.max_steps is not None else ceil(MAX_STEPS_FACTOR / self.p_term)
        object.__setattr__(self, "steps", steps)

    @property
    def fixed_budget(self) -> bool:
        """Whether walks run for exactly `steps` moves without terminating."""
        return self.p_term == 0


@dataclass(frozen=True, slots=True)
class WalkRecord:
    """One walker's visited nodes; nodes[0] is the start and length = len(nodes) - 1."""

    nodes: tuple[int, ...]
    truncated: bool = False

    @property
    def length(self) -> int:
        """Number of moves taken."""
        return len(self.nodes) - 1

    @property
    def end(self) -> int:
        """Node where the walk stopped."""
        return self.nodes[-1]


@dataclass
class EnsembleStats:
    """Diagnostic statistics over a batch of walks."""

    walks: int
    truncated: int
    mean_length: float
    max_length: int


def ensemble_stats(walks: Iterable[WalkRecord]) -> EnsembleStats:
    """Summarise walk lengths and truncations."""
    lengths: list[int] = []
    truncated = 0
    for walk in walks:
        lengths.append(walk.length)
        truncated += walk.truncated
    if not lengths:
        return EnsembleStats(walks=0, truncated=0, mean_length=0.0, max_length=0)
    return EnsembleStats(
        walks=len(lengths),
        truncated=truncated,
        mean_length=sum(lengths) / len(lengths),
        max_length=max(lengths),
    )


# =============================================================================
# Building blocks
# =============================================================================


def partition_into_blocks(walker_ids: Sequence[int], d: int, rng: np.random.Generator) -> list[list[int]]:
    """Shuffle walkers uniformly and cut them into blocks of size d plus a remainder.

    A single walker is returned as-is without consuming randomness.
    """
    if len(walker_ids) <= 1:
        return [list(walker_ids)]
    order = rng.permutation(len(walker_ids))
    shuffled = [walker_ids[k] for k in order]
    return [shuffled[start : start + d] for start in range(0, len(shuffled), d)]


def assign_without_replacement(
    block: Sequence[int],
    neighbors: Sequence[int],
    rng: np.random.Generator,
) -> dict[int, int]:
    """Send the walkers of one block to distinct, uniformly chosen neighbours.

    The joint law is a uniformly random injection from block into neighbors.
    A single walker draws with rng.integers, exactly as an uncoupled walker does.

    Raises:
        BlockAssignmentError: More walkers than neighbours.

    """
    if len(block) > len(neighbors):
        raise BlockAssignmentError(len(block), len(neighbors))
    if len(block) == 1:
        return {block[0]: neighbors[int(rng.integers(len(neighbors)))]}
    picks = rng.choice(len(neighbors), size=len(block), replace=False)
    return {walker: neighbors[int(k)] for walker, k in zip(block, picks, strict=True)}


def antithetic_pair_outcome(u: float, p: float) -> tuple[bool, bool]:
    """Terminations of the first and second walker of a pair sharing uniform u.

    The first terminates iff u < p and the second iff u > 1 − p, so each stops
    with probability p and both stop together with probability max(0, 2p − 1).
    """
    return u < p, u > 1.0 - p


def sample_terminations(
    live_walkers: Sequence[int],
    scheme: TerminationScheme,
    p: float,
    rng: np.random.Generator,
) -> set[int]:
    """Draw which live walkers terminate before the next move.

    Antithetic pairs are (0, 1), (2, 3), ... by walker index; a walker whose
    partner is no longer live falls back to an independent Bernoulli(p).
    """
    if p <= 0 or not live_walkers:
        return set()
    if scheme is TerminationScheme.INDEPENDENT:
        draws = rng.random(len(live_walkers))
        return {walker for walker, u in zip(live_walkers, draws, strict=True) if u < p}

    live = set(live_walkers)
    stopped: set[int] = set()
    for walker in sorted(live):
        partner = walker ^ 1
        if partner in live:
            if walker < partner:
                first, second = antithetic_pair_outcome(float(rng.random()), p)
                if first:
                    stopped.add(walker)
                if second:
                    stopped.add(partner)
        elif rng.random() < p:
            stopped.add(walker)
    return stopped


# =============================================================================
# Ensemble simulation
# =============================================================================


def _move_coupled(graph: Graph, paths: list[list[int]], live: list[int], rng: np.random.Generator) -> None:
    groups: defaultdict[int, list[int]] = defaultdict(list)
    for walker in live:
        groups[paths[walker][-1]].append(walker)
    for node in sorted(groups):
        neighbors = graph.neighbors(node)
        for block in partition_into_blocks(groups[node], len(neighbors), rng):
            for walker, target in assign_without_replacement(block, neighbors, rng).items():
                paths[walker].append(target)


def simulate_ensemble(
    graph: Graph,
    start: int,
    config: EnsembleConfig,
    rng: np.random.Generator,
) -> list[WalkRecord]:
    """Simulate config.walkers walkers launched together from start.

    Each timestep samples terminations first, then moves the survivors. A walk
    still alive after config.steps moves is flagged truncated, except in the
    fixed-budget mode where that is the intended end.

    Args:
        graph: Graph to walk on.
        start: Common start node.
        config: Ensemble parameters.
        rng: Dedicated generator for this ensemble (see RandomStreams).

    Returns:
        One WalkRecord per walker, in walker-index order.

    Raises:
        EnsembleConfigError: Start node out of range.

    """
    if not 0 <= start < graph.node_count:
        msg = f"Start node {start} outside 0..{graph.node_count - 1}"
        raise EnsembleConfigError(msg)

    paths = [[start] for _ in range(config.walkers)]
    live = list(range(config.walkers))
    for step in range(config.steps):
        stopped = sample_terminations(live, config.termination, config.p_term, rng)
        if stopped:
            live = [walker for walker in live if walker not in stopped]
        if not live:
            break
        if config.coupling.active_at(step):
            _move_coupled(graph, paths, live, rng)
        else:
            for walker in live:
                neighbors = graph.neighbors(paths[walker][-1])
                paths[walker].append(neighbors[int(rng.integers(len(neighbors)))])

    truncated: set[int] = set() if config.fixed_budget else set(live)
    records = [WalkRecord(tuple(path), walker in truncated) for walker, path in enumerate(paths)]
    if _LOGGER.isEnabledFor(logging.DEBUG):
        _LOGGER.debug("Ensemble from node %d: %s", start, ensemble_stats(records))
    return records


# =============================================================================
# Block statistics
# =============================================================================


def pair_co_block_probability(group_size: int, d: int) -> float:
    """Probability two given walkers of a co-located group land in the same block."""
    if group_size < 2:  # noqa: PLR2004
        return 0.0
    full, remainder = divmod(group_size, d)
    same = full * d * (d - 1) + remainder * (remainder - 1)
    return same / (group_size * (group_size - 1))


def surviving_pair_co_block_probability(walkers: int, d: int, p_term: float) -> float:
    """Co-block probability of two walkers that both survive the first termination draw.

    The other walkers survive independently with probability 1 − p_term, so the
    group size is 2 + Binomial(walkers − 2, 1 − p_term).
    """
    others = walkers - 2
    survive = 1.0 - p_term
    return sum(
        comb(others, k) * survive**k * p_term ** (others - k) * pair_co_block_probability(k + 2, d)
        for k in range(others + 1)
    )


# =============================================================================
# Scheme codes
# =============================================================================

_SCHEME_CODES: dict[str, tuple[CouplingScheme, TerminationScheme]] = {
    SCHEME_IID: (CouplingScheme.IID, TerminationScheme.INDEPENDENT),
    SCHEME_ANTITHETIC: (CouplingScheme.IID, TerminationScheme.ANTITHETIC),
    SCHEME_REPELLING: (CouplingScheme.REPELLING, TerminationScheme.INDEPENDENT),
    SCHEME_ANTITHETIC_REPELLING: (CouplingScheme.REPELLING, TerminationScheme.ANTITHETIC),
    SCHEME_TRANSIENT: (CouplingScheme.TRANSIENT_REPELLING, TerminationScheme.INDEPENDENT),
}


def schemes_for_code(code: str) -> tuple[CouplingScheme, TerminationScheme]:
    """Coupling and termination schemes for a runner scheme code such as "ar"."""
    try:
        return _SCHEME_CODES[code]
    except KeyError as err:
        msg = f"Unknown scheme code {code!r}, expected one of {', '.join(_SCHEME_CODES)}"
        raise EnsembleConfigError(msg) from err
