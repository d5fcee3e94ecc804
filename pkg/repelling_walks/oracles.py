"""Exact reference distributions of coupled walker ensembles on tiny graphs.

The coupled process is expanded exhaustively: termination branches are
enumerated explicitly, while the block partition and the injection of each
block into the neighbourhood are integrated analytically (every permutation
and every injection is equally likely). Probabilities are exact Fractions in
rational mode and floats otherwise.
"""

from __future__ import annotations

from collections import defaultdict
from collections.abc import Sequence
from dataclasses import dataclass
from enum import StrEnum
from fractions import Fraction
from functools import cache
from itertools import permutations, product
import logging
from math import factorial, perm

import numpy as np
from numpy.typing import NDArray

from .const import ORACLE_STATE_BUDGET
from .errors import OracleBudgetError, PreconditionError
from .graph import Graph, transition_matrix
from .grf import walk_loads
from .step_linear import StepFunctionSpec, evaluate_step_by_step
from .walks import CouplingScheme, TerminationScheme, WalkRecord

_LOGGER = logging.getLogger(__name__)

type Probability = Fraction | float

# One walker's (current node, still alive) pair in the position chain
type Position = tuple[int, bool]


@dataclass(frozen=True, slots=True)
class WalkPrefix:
    """A walker's path up to the horizon; alive means it has not terminated yet."""

    nodes: tuple[int, ...]
    alive: bool

    @property
    def length(self) -> int:
        """Number of moves taken."""
        return len(self.nodes) - 1

    def traverses(self, walk: Sequence[int]) -> bool:
        """Whether this path starts with the node sequence walk."""
        return self.nodes[: len(walk)] == tuple(walk)


@dataclass(frozen=True)
class JointWalkDistribution:
    """Law of the m-tuple of walk prefixes after a fixed number of steps."""

    horizon: int
    walkers: int
    entries: dict[tuple[WalkPrefix, ...], Probability]

    def total(self) -> Probability:
        """Total probability mass (exactly 1 in rational mode)."""
        return sum(self.entries.values(), Fraction(0))

    def marginal(self, walker: int) -> dict[WalkPrefix, Probability]:
        """Law of one walker's prefix."""
        law: defaultdict[WalkPrefix, Probability] = defaultdict(int)
        for walks, probability in self.entries.items():
            law[walks[walker]] += probability
        return dict(law)


def _as_probability(p: float | Fraction, *, rational: bool) -> Probability:
    if rational:
        return p if isinstance(p, Fraction) else Fraction(str(p))
    return float(p)


def _uniform(outcomes: int, *, rational: bool) -> Probability:
    return Fraction(1, outcomes) if rational else 1.0 / outcomes


def _estimated_states(max_degree: int, walkers: int, horizon: int) -> int:
    """Upper bound on joint prefix tuples: (Σ_{l≤T} d_max^l)^m."""
    per_walker = sum(max_degree**length for length in range(horizon + 1))
    return per_walker**walkers


def _check_budget(graph: Graph, walkers: int, horizon: int) -> None:
    estimate = _estimated_states(graph.max_degree, walkers, horizon)
    if estimate > ORACLE_STATE_BUDGET:
        raise OracleBudgetError(estimate, ORACLE_STATE_BUDGET)


# =============================================================================
# One synchronous step
# =============================================================================


def _termination_law(
    live: Sequence[int],
    scheme: TerminationScheme,
    p: Probability,
) -> list[tuple[frozenset[int], Probability]]:
    """Every set of terminating walkers with its probability."""
    if p == 0:
        return [(frozenset(), 1)]
    one_minus = 1 - p
    if scheme is TerminationScheme.INDEPENDENT:
        units = [[(frozenset[int](), one_minus), (frozenset({walker}), p)] for walker in live]
    else:
        both = max(2 * p - 1, 0)
        only = p - both
        neither = 1 - 2 * p + both
        live_set = set(live)
        units = []
        for walker in sorted(live_set):
            partner = walker ^ 1
            if partner not in live_set:
                units.append([(frozenset[int](), one_minus), (frozenset({walker}), p)])
            elif walker < partner:
                outcomes = [
                    (frozenset[int](), neither),
                    (frozenset({walker}), only),
                    (frozenset({partner}), only),
                    (frozenset({walker, partner}), both),
                ]
                units.append([(stopped, weight) for stopped, weight in outcomes if weight])
    law: list[tuple[frozenset[int], Probability]] = []
    for combination in product(*units):
        stopped = frozenset[int]().union(*(part for part, _ in combination))
        weight: Probability = 1
        for _, factor in combination:
            weight *= factor
        law.append((stopped, weight))
    return law


@cache
def _group_move_law(
    group_size: int,
    neighbors: tuple[int, ...],
    *,
    coupled: bool,
    rational: bool,
) -> tuple[tuple[tuple[int, ...], Probability], ...]:
    """Law of the destinations of a co-located group, in group order."""
    d = len(neighbors)
    law: defaultdict[tuple[int, ...], Probability] = defaultdict(int)
    if not coupled or group_size == 1:
        weight = _uniform(d**group_size, rational=rational)
        for targets in product(neighbors, repeat=group_size):
            law[targets] += weight
        return tuple(law.items())

    order_weight = _uniform(factorial(group_size), rational=rational)
    for order in permutations(range(group_size)):
        blocks = [order[start : start + d] for start in range(0, group_size, d)]
        block_weight = [_uniform(perm(d, len(block)), rational=rational) for block in blocks]
        per_block = [list(permutations(neighbors, len(block))) for block in blocks]
        for choice in product(*per_block):
            destination = [0] * group_size
            weight: Probability = order_weight
            for block, targets, factor in zip(blocks, choice, block_weight, strict=True):
                for member, target in zip(block, targets, strict=True):
                    destination[member] = target
                weight *= factor
            law[tuple(destination)] += weight
    return tuple(law.items())


def _step_law(
    graph: Graph,
    state: tuple[Position, ...],
    *,
    coupled: bool,
    termination: TerminationScheme,
    p: Probability,
    rational: bool,
) -> list[tuple[tuple[Position, ...], Probability]]:
    """Law of the next positions: terminations first, then the moves of survivors."""
    live = [walker for walker, (_, alive) in enumerate(state) if alive]
    law: defaultdict[tuple[Position, ...], Probability] = defaultdict(int)
    for stopped, stop_weight in _termination_law(live, termination, p):
        groups: defaultdict[int, list[int]] = defaultdict(list)
        for walker in live:
            if walker not in stopped:
                groups[state[walker][0]].append(walker)
        group_laws = [
            (members, _group_move_law(len(members), graph.neighbors(node), coupled=coupled, rational=rational))
            for node, members in sorted(groups.items())
        ]
        for moves in product(*(group_law for _, group_law in group_laws)):
            updated = [(node, alive and walker not in stopped) for walker, (node, alive) in enumerate(state)]
            weight = stop_weight
            for (members, _), (targets, factor) in zip(group_laws, moves, strict=True):
                for walker, target in zip(members, targets, strict=True):
                    updated[walker] = (target, True)
                weight *= factor
            law[tuple(updated)] += weight
    return list(law.items())


# =============================================================================
# Enumerations
# =============================================================================


def enumerate_joint_walks(
    graph: Graph,
    start: int,
    coupling: CouplingScheme,
    walkers: int,
    p_term: float | Fraction,
    horizon: int,
    *,
    termination: TerminationScheme = TerminationScheme.INDEPENDENT,
    rational: bool = True,
) -> JointWalkDistribution:
    """Exact law of the walkers' prefixes after horizon synchronous steps.

    Raises:
        OracleBudgetError: The prefix tuple count could exceed ORACLE_STATE_BUDGET.

    """
    _check_budget(graph, walkers, horizon)
    p = _as_probability(p_term, rational=rational)
    start_walk = WalkPrefix((start,), alive=True)
    entries: dict[tuple[WalkPrefix, ...], Probability] = {(start_walk,) * walkers: Fraction(1) if rational else 1.0}
    for step in range(horizon):
        coupled = coupling.active_at(step)
        expanded: defaultdict[tuple[WalkPrefix, ...], Probability] = defaultdict(int)
        for walks, probability in entries.items():
            state = tuple((walk.nodes[-1], walk.alive) for walk in walks)
            step_law = _step_law(graph, state, coupled=coupled, termination=termination, p=p, rational=rational)
            for updated, weight in step_law:
                expanded[_extend(walks, updated)] += probability * weight
        entries = dict(expanded)
    _LOGGER.debug("Enumerated %d joint prefixes for %d walkers over %d steps", len(entries), walkers, horizon)
    return JointWalkDistribution(horizon=horizon, walkers=walkers, entries=entries)


def _extend(walks: tuple[WalkPrefix, ...], updated: tuple[Position, ...]) -> tuple[WalkPrefix, ...]:
    extended: list[WalkPrefix] = []
    for walk, (node, alive) in zip(walks, updated, strict=True):
        if walk.alive and alive:
            extended.append(WalkPrefix((*walk.nodes, node), alive=True))
        elif walk.alive:
            extended.append(WalkPrefix(walk.nodes, alive=False))
        else:
            extended.append(walk)
    return tuple(extended)


def simple_walk_law(
    graph: Graph,
    start: int,
    p_term: float | Fraction,
    horizon: int,
    *,
    rational: bool = True,
) -> dict[WalkPrefix, Probability]:
    """Single-walker prefix law: each move has probability (1 − p)/d_v, stopping p."""
    p = _as_probability(p_term, rational=rational)
    law: dict[WalkPrefix, Probability] = {}

    def expand(nodes: tuple[int, ...], probability: Probability) -> None:
        if len(nodes) - 1 == horizon:
            law[WalkPrefix(nodes, alive=True)] = probability
            return
        if p:
            law[WalkPrefix(nodes, alive=False)] = probability * p
        degree = graph.degree(nodes[-1])
        move = (1 - p) / degree
        for neighbor in graph.neighbors(nodes[-1]):
            expand((*nodes, neighbor), probability * move)

    expand((start,), Fraction(1) if rational else 1.0)
    return law


def enumerate_joint_positions(
    graph: Graph,
    start: int,
    coupling: CouplingScheme,
    walkers: int,
    p_term: float,
    horizon: int,
    *,
    termination: TerminationScheme = TerminationScheme.INDEPENDENT,
) -> dict[tuple[Position, ...], float]:
    """Law of (node, alive) per walker after horizon steps, by the augmented position chain.

    Works in floats and merges histories that share positions, so long horizons
    stay cheap on small graphs.
    """
    state: tuple[Position, ...] = ((start, True),) * walkers
    law: dict[tuple[Position, ...], float] = {state: 1.0}
    p = float(p_term)
    for step in range(horizon):
        coupled = coupling.active_at(step)
        expanded: defaultdict[tuple[Position, ...], float] = defaultdict(float)
        for positions, probability in law.items():
            if not any(alive for _, alive in positions):
                expanded[positions] += probability
                continue
            step_law = _step_law(graph, positions, coupled=coupled, termination=termination, p=p, rational=False)
            for updated, weight in step_law:
                expanded[updated] += probability * float(weight)
        law = dict(expanded)
    return law


def pagerank_estimator_moments(
    graph: Graph,
    p_term: float,
    walkers: int,
    coupling: CouplingScheme,
    horizon: int,
    *,
    termination: TerminationScheme = TerminationScheme.INDEPENDENT,
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Exact mean and per-node variance of the PageRank estimator with walks capped at horizon.

    Walkers still alive at the horizon count as ending where they stand.
    """
    n = graph.node_count
    scale = 1.0 / (n * walkers)
    mean = np.zeros(n)
    variance = np.zeros(n)
    for start in range(n):
        law = enumerate_joint_positions(graph, start, coupling, walkers, p_term, horizon, termination=termination)
        first = np.zeros(n)
        second = np.zeros(n)
        for positions, probability in law.items():
            counts = np.bincount([node for node, _ in positions], minlength=n)
            first += probability * counts
            second += probability * counts**2
        mean += scale * first
        variance += scale**2 * (second - first**2)
    return mean, variance


# =============================================================================
# Two-walker transitions
# =============================================================================


def joint_transition_matrix(graph: Graph, coupling: CouplingScheme, walkers: int = 2) -> NDArray[np.float64]:
    """One-step transition matrix of two walkers on node pairs, index i1·N + i2.

    I.i.d. walkers give P ⊗ P. Repelling (and the first step of transient
    repelling) makes co-located walkers leave along distinct edges, uniformly
    over ordered pairs of distinct neighbours.

    Raises:
        PreconditionError: walkers other than 2.

    """
    if walkers != 2:  # noqa: PLR2004
        msg = f"Joint transition matrix is defined for two walkers, got {walkers}"
        raise PreconditionError(msg)
    transition = transition_matrix(graph)
    matrix = np.kron(transition, transition)
    if coupling is CouplingScheme.IID:
        return matrix
    n = graph.node_count
    for node in range(n):
        degree = graph.degree(node)
        if degree == 1:
            continue
        row = np.outer(transition[node], transition[node]) * degree / (degree - 1)
        np.fill_diagonal(row, 0.0)
        matrix[node * n + node] = row.ravel()
    return matrix


def one_step_mutual_information(graph: Graph, node: int, coupling: CouplingScheme) -> float:
    """Mutual information (nats) between the next nodes of two walkers co-located at node."""
    n = graph.node_count
    joint = joint_transition_matrix(graph, coupling)[node * n + node].reshape(n, n)
    first, second = joint.sum(axis=1), joint.sum(axis=0)
    support = joint > 0
    ratio = joint[support] / np.outer(first, second)[support]
    return float((joint[support] * np.log(ratio)).sum())


# =============================================================================
# Prefix-count correlations
# =============================================================================


class CorrelationClass(StrEnum):
    """How two walks from the same start relate to each other."""

    LENGTH_ZERO = "length_zero"
    SAME = "same"
    SUBWALK = "subwalk"
    DIVERGE_AT_START = "diverge_at_start"
    DIVERGE_ELSEWHERE = "diverge_elsewhere"


def classify_walk_pair(walk_x: Sequence[int], walk_y: Sequence[int]) -> CorrelationClass:
    """Correlation class of two node sequences sharing a start node."""
    if len(walk_x) == 1 or len(walk_y) == 1:
        return CorrelationClass.LENGTH_ZERO
    if tuple(walk_x) == tuple(walk_y):
        return CorrelationClass.SAME
    shorter, longer = sorted((tuple(walk_x), tuple(walk_y)), key=len)
    if longer[: len(shorter)] == shorter:
        return CorrelationClass.SUBWALK
    if walk_x[1] != walk_y[1]:
        return CorrelationClass.DIVERGE_AT_START
    return CorrelationClass.DIVERGE_ELSEWHERE


def prefix_probability(graph: Graph, walk: Sequence[int], p_term: float | Fraction) -> Fraction:
    """Probability c(ω) = Π (1 − p)/d_v that one walker traverses walk."""
    p = _as_probability(p_term, rational=True)
    probability = Fraction(1)
    for node in walk[:-1]:
        probability *= (1 - p) / graph.degree(node)
    return Fraction(probability)


def prefix_count(walks: tuple[WalkPrefix, ...], walk: Sequence[int]) -> int:
    """N(ω): how many walkers traversed walk."""
    return sum(prefix.traverses(walk) for prefix in walks)


def correlation_term(
    graph: Graph,
    start: int,
    walk_x: Sequence[int],
    walk_y: Sequence[int],
    coupling: CouplingScheme,
    walkers: int,
    p_term: float | Fraction,
) -> Fraction:
    """E[N(ω_x) N(ω_y)] by exact enumeration."""
    if walk_x[0] != start or walk_y[0] != start:
        msg = "Both walks must begin at the start node"
        raise PreconditionError(msg)
    horizon = max(len(walk_x), len(walk_y)) - 1
    distribution = enumerate_joint_walks(graph, start, coupling, walkers, p_term, horizon)
    total = Fraction(0)
    for walks, probability in distribution.entries.items():
        total += probability * prefix_count(walks, walk_x) * prefix_count(walks, walk_y)
    return total


def correlation_term_closed_form(
    graph: Graph,
    start: int,
    walk_x: Sequence[int],
    walk_y: Sequence[int],
    coupling: CouplingScheme,
    walkers: int,
    p_term: float | Fraction,
) -> Fraction:
    """E[N(ω_x) N(ω_y)] from the per-class closed forms, with c^len replaced by Π(1 − p)/d_v.

    Only the pair term (walkers α ≠ β) changes with transient repulsion: it is
    scaled by d/(d − 1) for walks diverging at the start and vanishes for walks
    diverging later.

    Raises:
        PreconditionError: Full repelling coupling, or transient repelling with
            more walkers than the start degree.

    """
    degree = graph.degree(start)
    if coupling is CouplingScheme.REPELLING:
        msg = "Closed forms cover i.i.d. and transient repelling walkers only"
        raise PreconditionError(msg)
    if coupling is CouplingScheme.TRANSIENT_REPELLING and walkers > degree:
        msg = f"Closed forms need m <= d_start, got m={walkers}, d={degree}"
        raise PreconditionError(msg)
    c_x = prefix_probability(graph, walk_x, p_term)
    c_y = prefix_probability(graph, walk_y, p_term)
    c_longer = c_x if len(walk_x) >= len(walk_y) else c_y
    pair_term = walkers * (walkers - 1) * c_x * c_y
    kind = classify_walk_pair(walk_x, walk_y)

    if kind is CorrelationClass.LENGTH_ZERO:
        return walkers**2 * c_longer
    if kind in {CorrelationClass.SAME, CorrelationClass.SUBWALK}:
        single = walkers * c_longer
        return single if coupling is CouplingScheme.TRANSIENT_REPELLING else single + pair_term
    if coupling is CouplingScheme.IID:
        return pair_term
    if kind is CorrelationClass.DIVERGE_AT_START:
        return Fraction(degree, degree - 1) * pair_term
    return Fraction(0)


def prefix_count_moments(
    graph: Graph,
    walk: Sequence[int],
    coupling: CouplingScheme,
    walkers: int,
    p_term: float | Fraction,
) -> tuple[Fraction, Fraction]:
    """Exact mean and variance of N(ω) by enumeration."""
    distribution = enumerate_joint_walks(graph, walk[0], coupling, walkers, p_term, len(walk) - 1)
    first = Fraction(0)
    second = Fraction(0)
    for walks, probability in distribution.entries.items():
        count = prefix_count(walks, walk)
        first += probability * count
        second += probability * count**2
    return first, second - first**2


def prefix_count_variance_closed_form(
    graph: Graph,
    walk: Sequence[int],
    coupling: CouplingScheme,
    walkers: int,
    p_term: float | Fraction,
) -> Fraction:
    """Var N(ω): m c(1 − c) for i.i.d. walkers and m c(1 − m c) under repulsion.

    Repulsion keeps at most one walker on any walk of positive length once
    m <= d_start, so N(ω) is a Bernoulli count.

    Raises:
        PreconditionError: Coupled walkers with m > d_start or a zero-length walk.

    """
    c = prefix_probability(graph, walk, p_term)
    if coupling is CouplingScheme.IID:
        return walkers * c * (1 - c)
    if len(walk) < 2 or walkers > graph.degree(walk[0]):  # noqa: PLR2004
        msg = "Coupled closed form needs a walk of positive length and m <= d_start"
        raise PreconditionError(msg)
    return walkers * c * (1 - walkers * c)


# =============================================================================
# Functionals of enumerated ensembles
# =============================================================================


def enumerated_step_linear_variances(
    graph: Graph,
    spec: StepFunctionSpec,
    start: int,
    walkers: int,
    p_term: float,
) -> tuple[float, float]:
    """Var(Σ_α y(ω_α)) under i.i.d. and transient repulsion by path enumeration up to the table horizon."""
    variances: list[float] = []
    for coupling in (CouplingScheme.IID, CouplingScheme.TRANSIENT_REPELLING):
        distribution = enumerate_joint_walks(graph, start, coupling, walkers, p_term, spec.horizon, rational=False)
        first = 0.0
        second = 0.0
        for walks, probability in distribution.entries.items():
            total = sum(evaluate_step_by_step(spec, WalkRecord(walk.nodes)) for walk in walks)
            first += float(probability) * total
            second += float(probability) * total**2
        variances.append(second - first**2)
    return variances[0], variances[1]


def expected_features(
    graph: Graph,
    weights: NDArray[np.float64],
    distribution: JointWalkDistribution,
    p_term: float,
) -> NDArray[np.float64]:
    """E[φ(start)] under an enumerated ensemble law."""
    mean = np.zeros(graph.node_count)
    for walks, probability in distribution.entries.items():
        for walk in walks:
            for node, load in walk_loads(graph, weights, WalkRecord(walk.nodes), p_term):
                mean[node] += float(probability) * load
    return mean / distribution.walkers
