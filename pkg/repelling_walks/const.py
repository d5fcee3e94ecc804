"""Constants for the repelling walks library and benchmark runner."""

from typing import Final

PACKAGE: Final = "repelling_walks"

# Kernel experiments (graph random features)
DEFAULT_SIGMA: Final = 0.1  # Regulariser of the 2-regularised Laplacian kernel
DEFAULT_KERNEL_P_TERM: Final = 0.5  # Walker termination probability for GRFs
DEFAULT_TEST_FRACTION: Final = 0.05  # Held-out share of nodes for kernel regression
DEFAULT_ATTRIBUTE_DIM: Final = 3  # Synthetic attribute dimension when no file is given
DEFAULT_CLOSED_FORM_W: Final = 0.05  # Equal edge weight for the variance closed form
KERNEL_POWER: Final = 2  # Only the 2-regularised kernel is estimated

# PageRank experiments
DEFAULT_PAGERANK_P_TERM: Final = 0.3
PAGERANK_TOLERANCE: Final = 1e-12  # Power iteration residual (infinity norm)
PAGERANK_MAX_ITERATIONS: Final = 100_000

# Graphlet experiments
DEFAULT_WALK_LENGTH: Final = 16  # Nodes visited per walker (L)
MIN_WALK_LENGTH: Final = 3

# Walk engine
MAX_STEPS_FACTOR: Final = 16  # Default length cap is MAX_STEPS_FACTOR / p_term

# Guards
MAX_DENSE_NODES: Final = 5000  # Exact references use dense linear algebra
MAX_GENERATOR_ATTEMPTS: Final = 1000  # Connectivity retries for random generators
ORACLE_STATE_BUDGET: Final = 10**7  # Upper bound on enumerated joint states

# Sweeps
DEFAULT_M_VALUES: Final = (2, 4, 8, 16)
DEFAULT_TRIALS: Final = 100
DEFAULT_SEED: Final = 0
DEFAULT_WORKERS: Final = 1

# Scheme codes accepted by the runner
SCHEME_IID: Final = "iid"
SCHEME_ANTITHETIC: Final = "a"
SCHEME_REPELLING: Final = "r"
SCHEME_ANTITHETIC_REPELLING: Final = "ar"
SCHEME_TRANSIENT: Final = "tr"
SCHEME_CODES: Final = (
    SCHEME_IID,
    SCHEME_ANTITHETIC,
    SCHEME_REPELLING,
    SCHEME_ANTITHETIC_REPELLING,
    SCHEME_TRANSIENT,
)
KERNEL_ONLY_SCHEMES: Final = frozenset({SCHEME_ANTITHETIC, SCHEME_ANTITHETIC_REPELLING})
DEFAULT_SCHEMES: Final = (SCHEME_IID, SCHEME_REPELLING)

# Tasks
TASK_KERNEL_FROBENIUS: Final = "kernel-frobenius"
TASK_KERNEL_REGRESSION: Final = "kernel-regression"
TASK_PAGERANK: Final = "pagerank"
TASK_GRAPHLET: Final = "graphlet"
TASKS: Final = (TASK_KERNEL_FROBENIUS, TASK_KERNEL_REGRESSION, TASK_PAGERANK, TASK_GRAPHLET)
KERNEL_TASKS: Final = frozenset({TASK_KERNEL_FROBENIUS, TASK_KERNEL_REGRESSION})

# Metric names written to the CSV
METRIC_FROBENIUS: Final = "frobenius_error"
METRIC_ANGULAR: Final = "angular_error"
METRIC_L2: Final = "l2_error"
METRIC_C_TRI_SQUARED: Final = "c_tri_squared_error"
TASK_METRICS: Final = {
    TASK_KERNEL_FROBENIUS: METRIC_FROBENIUS,
    TASK_KERNEL_REGRESSION: METRIC_ANGULAR,
    TASK_PAGERANK: METRIC_L2,
    TASK_GRAPHLET: METRIC_C_TRI_SQUARED,
}

# CSV output
CSV_FIELDS: Final = ("task", "graph", "scheme", "m", "trial", "metric", "value", "seed")
CSV_HEADER: Final = ",".join(CSV_FIELDS)
INVALID_VALUE: Final = "nan"
DEFAULT_OUTPUT: Final = "results.csv"

# Config keys (CLI flags and JSON config share these names)
CONF_TASK: Final = "task"
CONF_GRAPH: Final = "graph"
CONF_SCHEMES: Final = "schemes"
CONF_M_VALUES: Final = "m"
CONF_P_TERM: Final = "pterm"
CONF_SIGMA: Final = "sigma"
CONF_WALK_LENGTH: Final = "walk_len"
CONF_TRIALS: Final = "trials"
CONF_SEED: Final = "seed"
CONF_OUTPUT: Final = "out"
CONF_WORKERS: Final = "workers"
CONF_ATTRIBUTES: Final = "attributes"
CONF_TEST_FRACTION: Final = "test_fraction"
