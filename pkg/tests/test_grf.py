"""Tests for graph random features and the kernel estimator."""

from __future__ import annotations

import networkx as nx
import numpy as np
import pytest

from repelling_walks.errors import PreconditionError
from repelling_walks.exact import exact_kernel_lap, kernel_shrinkage
from repelling_walks.generators import grid_node
from repelling_walks.graph import Graph, adjacency_matrix, normalized_adjacency
from repelling_walks.grf import (
    ZERO_PREDICTION_ERROR,
    GrfVector,
    angular_regression_error,
    b_term,
    c_term,
    estimate_gram,
    exact_gram_entry_variance,
    feature_matrix,
    frobenius_error,
    grf_vector,
    kernel_regression_experiment,
    scaled_weights,
    synthetic_smooth_attributes,
    variance_difference_closed_form,
    walk_loads,
)
from repelling_walks.utils import sample_variance_with_stderr
from repelling_walks.walks import (
    CouplingScheme,
    EnsembleConfig,
    RandomStreams,
    TerminationScheme,
    WalkRecord,
    schemes_for_code,
)


class TestGrfVector:
    """Tests for GrfVector."""

    def test_dot(self) -> None:
        """Test the sparse inner product."""
        left = GrfVector(0, {0: 1.0, 2: 3.0})
        right = GrfVector(1, {1: 5.0, 2: 2.0})

        assert left.dot(right) == 6.0
        assert right.dot(left) == 6.0

    def test_to_dense(self) -> None:
        """Test the dense copy."""
        np.testing.assert_array_equal(GrfVector(0, {0: 1.0, 2: 3.0}).to_dense(4), [1.0, 0.0, 3.0, 0.0])


class TestWalkLoads:
    """Tests for walk_loads and grf_vector."""

    def test_scaled_weights(self, path3: Graph) -> None:
        """Test that W' = cW."""
        np.testing.assert_allclose(scaled_weights(path3, 2.0), 0.8 * normalized_adjacency(path3))

    def test_importance_weights(self, star4: Graph) -> None:
        """Test that each move multiplies the load by W'_uv d_u / (1 - p)."""
        weights = scaled_weights(star4, 1.0)
        c = kernel_shrinkage(1.0)

        loads = walk_loads(star4, weights, WalkRecord((0, 1, 0)), 0.5)

        first = c * 0.5 * 4 / 0.5
        assert loads[0] == (0, 1.0)
        assert loads[1] == (1, pytest.approx(first))
        assert loads[2] == (0, pytest.approx(first * c * 0.5 * 1 / 0.5))

    def test_start_deposit(self, karate: Graph, rng: np.random.Generator) -> None:
        """Test that every walker deposits 1 at its own start."""
        config = EnsembleConfig(walkers=4, p_term=0.5, coupling=CouplingScheme.REPELLING)

        vector = grf_vector(karate, 3, scaled_weights(karate, 0.5), config, rng)

        assert vector.owner == 3
        assert vector.loads[3] >= 1.0

    def test_fixed_budget_rejected(self, karate: Graph, rng: np.random.Generator) -> None:
        """Test that p_term = 0 cannot be used for features."""
        config = EnsembleConfig(walkers=2, p_term=0.0, max_steps=3)

        with pytest.raises(PreconditionError):
            grf_vector(karate, 0, scaled_weights(karate, 0.5), config, rng)


class TestFeatureMatrix:
    """Tests for feature_matrix and estimate_gram."""

    @pytest.mark.slow
    @pytest.mark.parametrize(
        ("coupling", "termination"),
        [
            (CouplingScheme.IID, TerminationScheme.INDEPENDENT),
            (CouplingScheme.REPELLING, TerminationScheme.INDEPENDENT),
            (CouplingScheme.REPELLING, TerminationScheme.ANTITHETIC),
            (CouplingScheme.TRANSIENT_REPELLING, TerminationScheme.INDEPENDENT),
        ],
    )
    def test_features_are_unbiased(
        self, complete4: Graph, coupling: CouplingScheme, termination: TerminationScheme
    ) -> None:
        """Test that E[φ(i)] = [(I - W')^{-1}]_i under every scheme."""
        weights = scaled_weights(complete4, 1.0)
        config = EnsembleConfig(walkers=3, p_term=0.5, coupling=coupling, termination=termination)
        reps = 2000
        samples = np.array(
            [feature_matrix(complete4, weights, config, RandomStreams(rep)) for rep in range(reps)]
        )

        expected = np.linalg.inv(np.eye(4) - weights)
        stderr = samples.std(axis=0, ddof=1) / np.sqrt(reps)

        assert np.all(np.abs(samples.mean(axis=0) - expected) <= 5 * stderr + 1e-9)

    def test_gram_is_symmetric_and_reproducible(self, karate: Graph) -> None:
        """Test that the estimate is symmetric and fixed by its streams."""
        config = EnsembleConfig(walkers=4, p_term=0.5, coupling=CouplingScheme.REPELLING)

        first = estimate_gram(karate, 0.5, config, RandomStreams(3))
        second = estimate_gram(karate, 0.5, config, RandomStreams(3))

        np.testing.assert_allclose(first, first.T)
        np.testing.assert_array_equal(first, second)

    def test_gram_is_one_feature_set(self, karate: Graph) -> None:
        """Test that K̂ is the scaled product of a single per-node feature matrix."""
        config = EnsembleConfig(walkers=4, p_term=0.5, coupling=CouplingScheme.REPELLING)
        features = feature_matrix(karate, scaled_weights(karate, 0.5), config, RandomStreams(3))

        k_hat = estimate_gram(karate, 0.5, config, RandomStreams(3))

        np.testing.assert_allclose(k_hat, features @ features.T / 1.25**2)

    @pytest.mark.slow
    def test_gram_is_unbiased_off_diagonal(self, cycle4: Graph) -> None:
        """Test that off-diagonal entries average to the exact kernel and the diagonal only overshoots."""
        config = EnsembleConfig(walkers=2, p_term=0.5, coupling=CouplingScheme.REPELLING)
        reps = 2000
        samples = np.array([estimate_gram(cycle4, 1.0, config, RandomStreams(rep)) for rep in range(reps)])
        exact = exact_kernel_lap(cycle4, 1.0)

        mean = samples.mean(axis=0)
        stderr = samples.std(axis=0, ddof=1) / np.sqrt(reps)
        off_diagonal = ~np.eye(4, dtype=bool)

        assert np.all(np.abs(mean - exact)[off_diagonal] <= 5 * stderr[off_diagonal] + 1e-9)
        assert np.all(np.diag(mean) >= np.diag(exact) - 5 * np.diag(stderr))


class TestFrobeniusTrend:
    """Tests for the Frobenius error ordering across schemes."""

    @pytest.mark.slow
    def test_repelling_schemes_beat_iid_on_karate(self, karate: Graph) -> None:
        """Test that r and ar lower the mean relative Frobenius error at m = 16."""
        sigma = 0.1
        exact = exact_kernel_lap(karate, sigma)
        repeats = 30
        errors: dict[str, float] = {}
        for code in ("iid", "r", "ar"):
            coupling, termination = schemes_for_code(code)
            config = EnsembleConfig(walkers=16, p_term=0.5, coupling=coupling, termination=termination)
            errors[code] = float(
                np.mean(
                    [
                        frobenius_error(exact, estimate_gram(karate, sigma, config, RandomStreams(31).child(rep)))
                        for rep in range(repeats)
                    ]
                )
            )

        assert errors["r"] < errors["iid"]
        assert errors["ar"] < errors["iid"]


class TestFrobeniusError:
    """Tests for frobenius_error."""

    def test_exact_is_zero(self, path3: Graph) -> None:
        """Test that the exact kernel scores zero."""
        kernel = exact_kernel_lap(path3, 0.5)

        assert frobenius_error(kernel, kernel) == 0.0

    def test_relative(self) -> None:
        """Test that the error is relative to the exact norm."""
        assert frobenius_error(np.eye(2), 2 * np.eye(2)) == pytest.approx(1.0)

    def test_shape_mismatch(self) -> None:
        """Test that shapes must agree."""
        with pytest.raises(PreconditionError):
            frobenius_error(np.eye(2), np.eye(3))

    def test_zero_norm(self) -> None:
        """Test that a zero exact kernel is rejected."""
        with pytest.raises(PreconditionError):
            frobenius_error(np.zeros((2, 2)), np.eye(2))


class TestKernelRegression:
    """Tests for kernel regression scoring."""

    def test_perfect_direction(self) -> None:
        """Test that predictions parallel to the truth score zero."""
        kernel = np.ones((3, 3))
        attributes = np.array([[1.0, 1.0], [1.0, 1.0], [2.0, 2.0]])

        assert angular_regression_error(kernel, attributes, np.array([2])) == pytest.approx(0.0, abs=1e-12)

    def test_zero_prediction(self) -> None:
        """Test that a vanishing prediction scores the maximum error."""
        attributes = np.array([[1.0], [2.0], [3.0]])

        assert angular_regression_error(np.eye(3), attributes, np.array([0])) == ZERO_PREDICTION_ERROR

    def test_experiment_range(self, karate: Graph) -> None:
        """Test that the held-out angular error lies in [0, 2]."""
        config = EnsembleConfig(walkers=4, p_term=0.5, coupling=CouplingScheme.REPELLING)
        attributes = synthetic_smooth_attributes(karate, 3, 1.0, np.random.default_rng(0))

        error = kernel_regression_experiment(karate, attributes, 0.1, 1.0, config, RandomStreams(1))

        assert 0.0 <= error <= 2.0

    @pytest.mark.slow
    def test_repelling_not_worse_across_seeds(self, karate: Graph) -> None:
        """Test that repelling walkers do not raise the mean angular error over 200 seeded splits."""
        differences: list[float] = []
        for seed in range(200):
            attributes = synthetic_smooth_attributes(karate, 3, 1.0, np.random.default_rng(seed))
            errors: dict[CouplingScheme, float] = {}
            for coupling in (CouplingScheme.IID, CouplingScheme.REPELLING):
                config = EnsembleConfig(walkers=16, p_term=0.5, coupling=coupling)
                errors[coupling] = kernel_regression_experiment(
                    karate, attributes, 0.1, 1.0, config, RandomStreams(seed)
                )
            differences.append(errors[CouplingScheme.REPELLING] - errors[CouplingScheme.IID])

        variance, _ = sample_variance_with_stderr(differences)

        assert np.mean(differences) <= 3 * np.sqrt(variance / len(differences))

    @pytest.mark.parametrize("fraction", [0.0, 1.0, 0.99])
    def test_bad_fraction(self, path3: Graph, fraction: float) -> None:
        """Test that the split must leave test and training nodes."""
        config = EnsembleConfig(walkers=2, p_term=0.5)

        with pytest.raises(PreconditionError):
            kernel_regression_experiment(path3, np.ones((3, 1)), fraction, 1.0, config, RandomStreams(0))

    def test_zero_attribute_row(self, path3: Graph) -> None:
        """Test that zero attribute vectors are rejected."""
        config = EnsembleConfig(walkers=2, p_term=0.5)
        attributes = np.array([[1.0], [0.0], [1.0]])

        with pytest.raises(PreconditionError):
            kernel_regression_experiment(path3, attributes, 0.3, 1.0, config, RandomStreams(0))


class TestGramEntryVariance:
    """Tests for the exact Gram entry variance and its closed-form difference."""

    def test_repelling_has_no_closed_form(self, path5: Graph) -> None:
        """Test that full repelling coupling is rejected."""
        weights = scaled_weights(path5, 1.0)

        with pytest.raises(PreconditionError):
            exact_gram_entry_variance(path5, weights, 1, 3, 2, 0.5, CouplingScheme.REPELLING)

    @pytest.mark.slow
    @pytest.mark.parametrize("coupling", [CouplingScheme.IID, CouplingScheme.TRANSIENT_REPELLING])
    def test_matches_monte_carlo(self, complete4: Graph, coupling: CouplingScheme) -> None:
        """Test the exact variance of φ(i)ᵀφ(j) against independent ensembles."""
        weights = scaled_weights(complete4, 1.0)
        config = EnsembleConfig(walkers=2, p_term=0.5, coupling=coupling)
        streams = RandomStreams(99)
        trials = 20_000
        products = np.empty(trials)
        for trial in range(trials):
            left = grf_vector(complete4, 0, weights, config, streams.generator(trial, 0))
            right = grf_vector(complete4, 1, weights, config, streams.generator(trial, 1))
            products[trial] = left.dot(right)

        squares = (products - products.mean()) ** 2
        stderr = squares.std(ddof=1) / np.sqrt(trials)
        exact = exact_gram_entry_variance(complete4, weights, 0, 1, 2, 0.5, coupling)

        assert abs(products.var(ddof=1) - exact) < 5 * stderr

    def test_closed_form_leading_order(self, path5: Graph) -> None:
        """Test the small-w expansion of the P5 (1, 3) difference."""
        w = 1e-3

        report = variance_difference_closed_form(path5, 1, 3, 2, 0.5, w=w)

        assert report.term_a / w**4 == pytest.approx(0.25, rel=0.02)
        assert report.delta / w**4 == pytest.approx(5.25, rel=0.02)

    def test_distinct_nodes_required(self, path5: Graph) -> None:
        """Test that a diagonal entry is rejected."""
        weights = scaled_weights(path5, 1.0)

        with pytest.raises(PreconditionError):
            exact_gram_entry_variance(path5, weights, 2, 2, 2, 0.5, CouplingScheme.IID)

    @pytest.mark.parametrize("w", [0.01, 0.05])
    def test_closed_form_is_exact_on_path(self, path5: Graph, w: float) -> None:
        """Test that the closed form equals the difference of exact variances on a tree."""
        weights = w * adjacency_matrix(path5, weighted=False)
        var_iid = exact_gram_entry_variance(path5, weights, 1, 3, 2, 0.5, CouplingScheme.IID)
        var_transient = exact_gram_entry_variance(path5, weights, 1, 3, 2, 0.5, CouplingScheme.TRANSIENT_REPELLING)

        report = variance_difference_closed_form(path5, 1, 3, 2, 0.5, w=w)

        assert var_iid - var_transient > 0
        assert report.delta == pytest.approx(var_iid - var_transient, rel=1e-9)

    def test_transient_gap_positive_on_grid(self, grid4: Graph) -> None:
        """Test that transient repulsion lowers Var(φ(i)ᵀφ(j)) for every pair at distance 2 or more."""
        weights = 0.05 * adjacency_matrix(grid4, weighted=False)
        distances = dict(nx.all_pairs_shortest_path_length(grid4.to_networkx()))
        pairs = [(i, j) for i in range(16) for j in range(i + 1, 16) if distances[i][j] >= 2]

        gaps = [
            exact_gram_entry_variance(grid4, weights, i, j, 2, 0.5, CouplingScheme.IID)
            - exact_gram_entry_variance(grid4, weights, i, j, 2, 0.5, CouplingScheme.TRANSIENT_REPELLING)
            for i, j in pairs
        ]

        assert len(pairs) == 96
        assert min(gaps) > 0

    def test_closed_form_approximates_grid_gap(self, grid4: Graph) -> None:
        """Test that on a graph with cycles the closed form stays close to, but not on, the exact gap."""
        corner, other = grid_node(0, 0, 4), grid_node(0, 2, 4)
        weights = 0.05 * adjacency_matrix(grid4, weighted=False)
        exact_gap = exact_gram_entry_variance(
            grid4, weights, corner, other, 2, 0.5, CouplingScheme.IID
        ) - exact_gram_entry_variance(grid4, weights, corner, other, 2, 0.5, CouplingScheme.TRANSIENT_REPELLING)

        report = variance_difference_closed_form(grid4, corner, other, 2, 0.5)

        assert report.delta == pytest.approx(exact_gap, rel=0.05)
        assert report.delta != pytest.approx(exact_gap, rel=1e-6)

    @pytest.mark.slow
    @pytest.mark.parametrize("coupling", [CouplingScheme.TRANSIENT_REPELLING, CouplingScheme.REPELLING])
    def test_repulsion_not_worse_on_path(self, path5: Graph, coupling: CouplingScheme) -> None:
        """Test that repelling ensembles do not raise the empirical variance of φ(1)ᵀφ(3)."""
        weights = 0.05 * adjacency_matrix(path5, weighted=False)
        trials = 20_000
        variances: dict[CouplingScheme, tuple[float, float]] = {}
        for scheme in (CouplingScheme.IID, coupling):
            config = EnsembleConfig(walkers=2, p_term=0.5, coupling=scheme)
            streams = RandomStreams(57)
            products = np.array(
                [
                    grf_vector(path5, 1, weights, config, streams.generator(trial, 0)).dot(
                        grf_vector(path5, 3, weights, config, streams.generator(trial, 1))
                    )
                    for trial in range(trials)
                ]
            )
            variances[scheme] = sample_variance_with_stderr(products)

        var_iid, se_iid = variances[CouplingScheme.IID]
        var_coupled, se_coupled = variances[coupling]

        assert var_coupled <= var_iid + 3 * np.hypot(se_iid, se_coupled)

    @pytest.mark.parametrize(("i", "j", "w"), [(1, 1, 0.05), (0, 3, 0.05), (1, 3, 0.6)])
    def test_closed_form_domain(self, path5: Graph, i: int, j: int, w: float) -> None:
        """Test equal nodes, leaf endpoints and divergent w are rejected."""
        with pytest.raises(PreconditionError):
            variance_difference_closed_form(path5, i, j, 2, 0.5, w=w)

    def test_spreads_are_non_negative(self, karate: Graph) -> None:
        """Test that B and C are non-negative for every x."""
        n = karate.node_count
        weights = 0.02 * adjacency_matrix(karate, weighted=False)
        resolvent = np.linalg.inv(np.eye(n) - weights)
        resolvent_sq = resolvent @ resolvent

        assert np.all(b_term(resolvent_sq, weights, karate, 0) >= -1e-15)
        assert np.all(c_term(resolvent_sq, weights, karate, 0) >= -1e-15)
