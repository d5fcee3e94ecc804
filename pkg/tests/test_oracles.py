"""Tests for the exact ensemble oracles."""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from math import log

import numpy as np
import pytest

from repelling_walks.corpus import ORACLE_CORPUS, corpus_graph
from repelling_walks.errors import OracleBudgetError, PreconditionError
from repelling_walks.graph import Graph, transition_matrix
from repelling_walks.grf import scaled_weights
from repelling_walks.oracles import (
    CorrelationClass,
    classify_walk_pair,
    correlation_term,
    correlation_term_closed_form,
    enumerate_joint_positions,
    enumerate_joint_walks,
    expected_features,
    joint_transition_matrix,
    one_step_mutual_information,
    prefix_count_moments,
    prefix_count_variance_closed_form,
    prefix_probability,
    simple_walk_law,
)
from repelling_walks.walks import CouplingScheme, TerminationScheme

HALF = Fraction(1, 2)


class TestEnumerateJointWalks:
    """Tests for enumerate_joint_walks."""

    @pytest.mark.parametrize("name", ORACLE_CORPUS)
    @pytest.mark.parametrize("coupling", list(CouplingScheme))
    def test_marginals_are_simple_walks(self, name: str, coupling: CouplingScheme) -> None:
        """Test that each walker's law is exactly the simple walk with geometric termination."""
        graph = corpus_graph(name)
        p = Fraction(3, 10)

        distribution = enumerate_joint_walks(graph, 0, coupling, 2, p, 3)

        assert distribution.total() == 1
        expected = simple_walk_law(graph, 0, p, 3)
        assert distribution.marginal(0) == expected
        assert distribution.marginal(1) == expected

    @pytest.mark.parametrize("coupling", [CouplingScheme.IID, CouplingScheme.REPELLING])
    def test_antithetic_marginals(self, cycle4: Graph, coupling: CouplingScheme) -> None:
        """Test that antithetic termination keeps every marginal exact."""
        p = Fraction(2, 3)

        distribution = enumerate_joint_walks(
            cycle4, 0, coupling, 3, p, 3, termination=TerminationScheme.ANTITHETIC
        )

        expected = simple_walk_law(cycle4, 0, p, 3)
        assert all(distribution.marginal(walker) == expected for walker in range(3))

    def test_antithetic_pair_stops_together(self, path3: Graph) -> None:
        """Test that a pair both stops at step 0 with probability 2p - 1."""
        p = Fraction(7, 10)

        distribution = enumerate_joint_walks(
            path3, 0, CouplingScheme.IID, 2, p, 1, termination=TerminationScheme.ANTITHETIC
        )

        both = sum(prob for walks, prob in distribution.entries.items() if not any(w.alive for w in walks))
        assert both == 2 * p - 1

    def test_repelling_hub_is_a_permutation(self, star4: Graph) -> None:
        """Test that four walkers at a degree-4 hub take every leaf, each arrangement with probability 1/24."""
        distribution = enumerate_joint_walks(star4, 0, CouplingScheme.REPELLING, 4, 0, 1)

        assert len(distribution.entries) == 24
        assert set(distribution.entries.values()) == {Fraction(1, 24)}
        for walks in distribution.entries:
            assert sorted(walk.nodes[1] for walk in walks) == [1, 2, 3, 4]

    def test_remainder_blocks(self, star4: Graph) -> None:
        """Test that five walkers at a degree-4 hub leave exactly one leaf doubled."""
        distribution = enumerate_joint_walks(star4, 0, CouplingScheme.REPELLING, 5, 0, 1)

        for walks in distribution.entries:
            counts = sorted(np.bincount([walk.nodes[1] for walk in walks], minlength=5)[1:].tolist())
            assert counts == [1, 1, 1, 2]
        assert distribution.total() == 1

    def test_float_mode(self, complete4: Graph) -> None:
        """Test that float mode sums to one."""
        distribution = enumerate_joint_walks(complete4, 0, CouplingScheme.REPELLING, 2, 0.25, 3, rational=False)

        assert float(distribution.total()) == pytest.approx(1.0)

    def test_budget(self, karate: Graph) -> None:
        """Test that oversized enumerations are refused."""
        with pytest.raises(OracleBudgetError):
            enumerate_joint_walks(karate, 0, CouplingScheme.IID, 4, HALF, 10)


class TestEnumerateJointPositions:
    """Tests for the position chain."""

    def test_matches_walk_enumeration(self, cycle4: Graph) -> None:
        """Test that merging histories gives the same end-position law."""
        walks = enumerate_joint_walks(cycle4, 0, CouplingScheme.REPELLING, 2, 0.4, 4, rational=False)
        projected: defaultdict[tuple[tuple[int, bool], ...], float] = defaultdict(float)
        for prefixes, probability in walks.entries.items():
            projected[tuple((prefix.nodes[-1], prefix.alive) for prefix in prefixes)] += float(probability)

        positions = enumerate_joint_positions(cycle4, 0, CouplingScheme.REPELLING, 2, 0.4, 4)

        assert positions.keys() == projected.keys()
        for key, probability in positions.items():
            assert probability == pytest.approx(projected[key], abs=1e-14)


class TestJointTransitionMatrix:
    """Tests for the two-walker transition matrix."""

    def test_iid_is_kronecker(self, path3: Graph) -> None:
        """Test that independent walkers give P ⊗ P."""
        transition = transition_matrix(path3)

        np.testing.assert_allclose(
            joint_transition_matrix(path3, CouplingScheme.IID), np.kron(transition, transition)
        )

    @pytest.mark.parametrize("coupling", [CouplingScheme.REPELLING, CouplingScheme.TRANSIENT_REPELLING])
    def test_repelling_rows(self, complete4: Graph, coupling: CouplingScheme) -> None:
        """Test that co-located walkers never share a destination but keep uniform marginals."""
        n = complete4.node_count
        matrix = joint_transition_matrix(complete4, coupling)
        transition = transition_matrix(complete4)

        np.testing.assert_allclose(matrix.sum(axis=1), 1.0)
        for node in range(n):
            row = matrix[node * n + node].reshape(n, n)
            assert np.trace(row) == 0.0
            np.testing.assert_allclose(row.sum(axis=1), transition[node])
            np.testing.assert_allclose(row.sum(axis=0), transition[node])

    def test_leaf_rows_unchanged(self, star4: Graph) -> None:
        """Test that walkers sharing a leaf both go to the hub."""
        n = star4.node_count

        row = joint_transition_matrix(star4, CouplingScheme.REPELLING)[n + 1].reshape(n, n)

        assert row[0, 0] == 1.0

    def test_two_walkers_only(self, path3: Graph) -> None:
        """Test that other walker counts are refused."""
        with pytest.raises(PreconditionError):
            joint_transition_matrix(path3, CouplingScheme.IID, walkers=3)

    @pytest.mark.parametrize(
        ("name", "node", "expected"),
        [("K3", 0, log(2)), ("star-4", 0, log(4 / 3)), ("P3", 0, 0.0)],
    )
    def test_mutual_information(self, name: str, node: int, expected: float) -> None:
        """Test that repulsion at a degree-d node carries log(d / (d - 1)) nats."""
        graph = corpus_graph(name)

        assert one_step_mutual_information(graph, node, CouplingScheme.REPELLING) == pytest.approx(expected)
        assert one_step_mutual_information(graph, node, CouplingScheme.IID) == pytest.approx(0.0, abs=1e-15)


class TestCorrelationTerms:
    """Tests for prefix-count correlations."""

    @pytest.mark.parametrize(
        ("walk_x", "walk_y", "expected"),
        [
            ((0,), (0, 1), CorrelationClass.LENGTH_ZERO),
            ((0, 1), (0, 1), CorrelationClass.SAME),
            ((0, 1), (0, 1, 2), CorrelationClass.SUBWALK),
            ((0, 1), (0, 3), CorrelationClass.DIVERGE_AT_START),
            ((0, 1, 2), (0, 1, 0), CorrelationClass.DIVERGE_ELSEWHERE),
        ],
    )
    def test_classify(self, walk_x: tuple[int, ...], walk_y: tuple[int, ...], expected: CorrelationClass) -> None:
        """Test the five walk-pair classes."""
        assert classify_walk_pair(walk_x, walk_y) is expected

    def test_prefix_probability(self, star4: Graph) -> None:
        """Test that c(ω) multiplies (1 - p) / d_v along the walk."""
        assert prefix_probability(star4, (0, 1, 0), HALF) == Fraction(1, 8) * Fraction(1, 2)

    def test_same_walk_values(self, cycle4: Graph) -> None:
        """Test the same-walk term for m = 2, p = 1/2, d = 2."""
        iid = correlation_term(cycle4, 0, (0, 1), (0, 1), CouplingScheme.IID, 2, HALF)
        transient = correlation_term(cycle4, 0, (0, 1), (0, 1), CouplingScheme.TRANSIENT_REPELLING, 2, HALF)

        assert iid == Fraction(5, 8)
        assert transient == Fraction(1, 2)

    @pytest.mark.parametrize("name", ["C4", "K4"])
    @pytest.mark.parametrize("coupling", [CouplingScheme.IID, CouplingScheme.TRANSIENT_REPELLING])
    @pytest.mark.parametrize("walkers", [1, 2])
    @pytest.mark.parametrize(
        ("walk_x", "walk_y"),
        [
            ((0,), (0, 1, 2)),
            ((0, 1), (0, 1)),
            ((0, 1), (0, 1, 2)),
            ((0, 1), (0, 3)),
            ((0, 1, 2), (0, 1, 0)),
        ],
    )
    def test_closed_forms_match_enumeration(
        self,
        name: str,
        coupling: CouplingScheme,
        walkers: int,
        walk_x: tuple[int, ...],
        walk_y: tuple[int, ...],
    ) -> None:
        """Test every class of the correlation table against exact enumeration."""
        graph = corpus_graph(name)
        p = Fraction(1, 3)

        enumerated = correlation_term(graph, 0, walk_x, walk_y, coupling, walkers, p)
        closed = correlation_term_closed_form(graph, 0, walk_x, walk_y, coupling, walkers, p)

        assert enumerated == closed

    def test_three_walkers_on_k4(self, complete4: Graph) -> None:
        """Test the diverge-at-start row with m = d."""
        args = (complete4, 0, (0, 1), (0, 2), CouplingScheme.TRANSIENT_REPELLING, 3, HALF)

        assert correlation_term(*args) == correlation_term_closed_form(*args)

    def test_closed_form_domain(self, cycle4: Graph) -> None:
        """Test that full repulsion and m > d_start are refused."""
        with pytest.raises(PreconditionError):
            correlation_term_closed_form(cycle4, 0, (0, 1), (0, 1), CouplingScheme.REPELLING, 2, HALF)
        with pytest.raises(PreconditionError):
            correlation_term_closed_form(cycle4, 0, (0, 1), (0, 1), CouplingScheme.TRANSIENT_REPELLING, 3, HALF)

    def test_walks_must_share_start(self, cycle4: Graph) -> None:
        """Test that both walks start at the given node."""
        with pytest.raises(PreconditionError):
            correlation_term(cycle4, 0, (1, 2), (0, 1), CouplingScheme.IID, 2, HALF)


class TestPrefixCountVariance:
    """Tests for Var N(ω)."""

    @pytest.mark.parametrize("coupling", list(CouplingScheme))
    @pytest.mark.parametrize("walk", [(0, 1), (0, 1, 2), (0, 1, 0)])
    def test_closed_form_matches_enumeration(
        self, complete4: Graph, coupling: CouplingScheme, walk: tuple[int, ...]
    ) -> None:
        """Test the Bernoulli count under repulsion and the binomial count for i.i.d. walkers."""
        _, variance = prefix_count_moments(complete4, walk, coupling, 3, HALF)

        assert variance == prefix_count_variance_closed_form(complete4, walk, coupling, 3, HALF)

    def test_repulsion_reduces_variance(self, complete4: Graph) -> None:
        """Test that coupled counts vary less than independent ones."""
        iid = prefix_count_variance_closed_form(complete4, (0, 1), CouplingScheme.IID, 3, HALF)
        coupled = prefix_count_variance_closed_form(complete4, (0, 1), CouplingScheme.REPELLING, 3, HALF)

        assert coupled < iid

    def test_coupled_domain(self, cycle4: Graph) -> None:
        """Test that coupled closed forms need m <= d_start."""
        with pytest.raises(PreconditionError):
            prefix_count_variance_closed_form(cycle4, (0, 1), CouplingScheme.REPELLING, 3, HALF)


class TestExpectedFeatures:
    """Tests for expected_features."""

    def test_coupling_keeps_feature_mean(self, cycle4: Graph) -> None:
        """Test that repelling walkers have the same expected features as i.i.d. walkers."""
        weights = scaled_weights(cycle4, 1.0)
        iid = enumerate_joint_walks(cycle4, 0, CouplingScheme.IID, 2, 0.5, 4, rational=False)
        repelling = enumerate_joint_walks(cycle4, 0, CouplingScheme.REPELLING, 2, 0.5, 4, rational=False)

        np.testing.assert_allclose(
            expected_features(cycle4, weights, repelling, 0.5),
            expected_features(cycle4, weights, iid, 0.5),
            atol=1e-12,
        )

    def test_approaches_resolvent_row(self, cycle4: Graph) -> None:
        """Test that long horizons approach [(I - W')^{-1}]_0."""
        weights = scaled_weights(cycle4, 1.0)
        distribution = enumerate_joint_walks(cycle4, 0, CouplingScheme.IID, 1, 0.5, 12, rational=False)

        mean = expected_features(cycle4, weights, distribution, 0.5)

        np.testing.assert_allclose(mean, np.linalg.inv(np.eye(4) - weights)[0], atol=1e-3)
