"""Exception hierarchy for the repelling walks library."""

from __future__ import annotations

# =============================================================================
# Base
# =============================================================================


class RepellingWalksError(Exception):
    """Base class for every error raised by this package."""


# =============================================================================
# Graph construction and reference quantities
# =============================================================================


class GraphError(RepellingWalksError, ValueError):
    """Raised when a graph violates the simple, connected, undirected contract."""


class EdgeListParseError(GraphError):
    """Raised when an edge-list or attribute file cannot be parsed."""

    def __init__(self, message: str, line_number: int) -> None:
        """Initialize with message and 1-based line number."""
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class DisconnectedGraphError(GraphError):
    """Raised when a graph has more than one connected component."""

    def __init__(self, component_count: int) -> None:
        """Initialize with the number of components found."""
        super().__init__(f"Graph is disconnected ({component_count} components)")
        self.component_count = component_count


class GeneratorError(GraphError):
    """Raised when a generator cannot produce a connected graph."""


class NonEdgeError(GraphError):
    """Raised when consecutive walk states are not joined by an edge."""

    def __init__(self, u: int, v: int) -> None:
        """Initialize with the offending node pair."""
        super().__init__(f"({u}, {v}) is not an edge")
        self.u = u
        self.v = v


class DimensionGuardError(RepellingWalksError):
    """Raised when a dense exact computation is requested on too large a graph."""

    def __init__(self, node_count: int, limit: int) -> None:
        """Initialize with graph size and the configured limit."""
        super().__init__(f"Dense exact computation limited to {limit} nodes, graph has {node_count}")
        self.node_count = node_count
        self.limit = limit


class ConvergenceError(RepellingWalksError):
    """Raised when an iterative solver fails to reach its tolerance."""

    def __init__(self, iterations: int, residual: float) -> None:
        """Initialize with iteration count and final residual."""
        super().__init__(f"No convergence after {iterations} iterations (residual {residual:.3e})")
        self.iterations = iterations
        self.residual = residual


class PreconditionError(RepellingWalksError, ValueError):
    """Raised when an operation is called outside its documented domain."""


# =============================================================================
# Sampling
# =============================================================================


class EnsembleConfigError(RepellingWalksError, ValueError):
    """Raised when an ensemble configuration is invalid."""


class BlockAssignmentError(RepellingWalksError):
    """Raised when a block holds more walkers than the node has neighbours."""

    def __init__(self, block_size: int, degree: int) -> None:
        """Initialize with block size and node degree."""
        super().__init__(f"Block of {block_size} walkers cannot be spread over {degree} neighbours")
        self.block_size = block_size
        self.degree = degree


class OracleBudgetError(RepellingWalksError):
    """Raised when an exhaustive enumeration would exceed its state budget."""

    def __init__(self, estimated_states: int, budget: int) -> None:
        """Initialize with the estimated state count and budget."""
        super().__init__(f"Enumeration needs up to {estimated_states} states, budget is {budget}")
        self.estimated_states = estimated_states
        self.budget = budget


# =============================================================================
# Benchmark runner
# =============================================================================


class ExperimentConfigError(RepellingWalksError, ValueError):
    """Raised when an experiment configuration fails validation."""


class AggregationError(RepellingWalksError):
    """Raised when result rows cannot be summarised."""
