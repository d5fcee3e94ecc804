"""Type definitions for the repelling walks benchmark runner."""

from __future__ import annotations

from typing import Required, TypedDict

# =============================================================================
# Raw configuration (validated by config.py)
# =============================================================================


class ExperimentConfigData(TypedDict, total=False):
    """Experiment settings as read from the command line or a JSON file.

    Keys match the CLI flag names. Only task and graph are mandatory, everything
    else falls back to the defaults in const.py during validation.
    """

    task: Required[str]
    graph: Required[str]
    schemes: list[str]
    m: list[int]
    pterm: float
    sigma: float
    walk_len: int
    trials: int
    seed: int
    out: str
    workers: int
    attributes: str | None
    test_fraction: float


class GraphSpecParams(TypedDict, total=False):
    """Parameters parsed from a generator string such as "er:n=100,p=0.4,seed=7"."""

    n: int
    p: float
    d: int
    seed: int
    depth: int
    rows: int
    cols: int


# =============================================================================
# Results
# =============================================================================


class ResultRow(TypedDict):
    """One CSV row: a single metric for one (scheme, m, trial)."""

    task: str
    graph: str
    scheme: str
    m: int
    trial: int
    metric: str
    value: float  # NaN marks an invalid sample
    seed: int


class SummaryRow(TypedDict):
    """Aggregated statistics for one (scheme, m) cell."""

    scheme: str
    m: int
    mean: float
    std: float
    stderr: float
    n_valid: int
    n_invalid: int
    single_sample: bool
