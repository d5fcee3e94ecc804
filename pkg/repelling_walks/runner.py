"""Benchmark runner: sweeps schemes, walker counts and trials for one task."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
import logging
import math
import multiprocessing

import numpy as np
from numpy.typing import NDArray

from .aggregate import aggregate
from .config import ExperimentConfig
from .const import (
    DEFAULT_ATTRIBUTE_DIM,
    SCHEME_CODES,
    TASK_GRAPHLET,
    TASK_KERNEL_FROBENIUS,
    TASK_KERNEL_REGRESSION,
    TASK_METRICS,
    TASK_PAGERANK,
)
from .exact import exact_graphlet_concentration, exact_kernel_lap, exact_pagerank
from .generators import parse_graph_spec
from .graph import Graph, load_node_attributes
from .graphlets import estimate_triangle_concentration
from .grf import estimate_gram, frobenius_error, kernel_regression_experiment, synthetic_smooth_attributes
from .pagerank import estimate_pagerank, pagerank_error
from .results import read_results, row_sort_key, write_results
from .types import ResultRow, SummaryRow
from .walks import EnsembleConfig, RandomStreams, schemes_for_code

_LOGGER = logging.getLogger(__name__)

# First-level stream keys under the run seed
_ATTRIBUTE_STREAM = 0
_TRIAL_STREAM = 1

# Fork is unsafe once BLAS threads are running
_POOL_CONTEXT = multiprocessing.get_context("spawn")


@dataclass(frozen=True, slots=True)
class WorkItem:
    """One (scheme, m, trial) cell of the sweep."""

    scheme: str
    walkers: int
    trial: int


@dataclass(frozen=True)
class RunResult:
    """Rows in canonical order and their per-(scheme, m) summary."""

    rows: list[ResultRow]
    summary: list[SummaryRow]


class ExperimentRunner:
    """Runs one validated experiment configuration.

    Responsibilities:
    - Building the graph and the task's exact reference once per run
    - Expanding the sweep into (scheme, m, trial) work items
    - Evaluating work items inline or on a process pool
    - Writing the canonical CSV and summarising it per (scheme, m)

    Every work item draws from the sub-stream (m, trial) of the run seed, so
    results do not depend on the worker count, and schemes compared at the same
    (m, trial) share their random numbers.
    """

    def __init__(self, config: ExperimentConfig) -> None:
        """Load the graph and compute the exact reference for the task."""
        self._config = config
        self._graph = parse_graph_spec(config.graph)
        self._streams = RandomStreams(config.seed)
        self._kernel: NDArray[np.float64] | None = None
        self._pagerank: NDArray[np.float64] | None = None
        self._attributes: NDArray[np.float64] | None = None
        self._c_tri = 0.0

        if config.task == TASK_KERNEL_FROBENIUS:
            self._kernel = exact_kernel_lap(self._graph, config.sigma)
        elif config.task == TASK_KERNEL_REGRESSION:
            self._attributes = self._load_attributes()
        elif config.task == TASK_PAGERANK:
            self._pagerank = exact_pagerank(self._graph, config.p_term)
        elif config.task == TASK_GRAPHLET:
            concentration = exact_graphlet_concentration(self._graph)
            self._c_tri = concentration.c_tri
            if concentration.triangles == 0:
                _LOGGER.warning("Graph %s has no triangles; every estimate is 0", config.graph)

    @property
    def graph(self) -> Graph:
        """The graph under test."""
        return self._graph

    def _load_attributes(self) -> NDArray[np.float64]:
        if self._config.attributes is not None:
            text = self._config.attributes.read_text(encoding="utf-8")
            return load_node_attributes(text, self._graph)
        rng = self._streams.generator(_ATTRIBUTE_STREAM)
        return synthetic_smooth_attributes(self._graph, DEFAULT_ATTRIBUTE_DIM, self._config.sigma, rng)

    def work_items(self) -> list[WorkItem]:
        """All sweep cells in canonical order."""
        ordered = sorted(self._config.schemes, key=SCHEME_CODES.index)
        return [
            WorkItem(scheme, walkers, trial)
            for scheme in ordered
            for walkers in self._config.m_values
            for trial in range(self._config.trials)
        ]

    def run_item(self, item: WorkItem) -> ResultRow:
        """Evaluate one sweep cell."""
        config = self._config
        coupling, termination = schemes_for_code(item.scheme)
        streams = self._streams.child(_TRIAL_STREAM, item.walkers, item.trial)

        if config.task == TASK_GRAPHLET:
            sample = estimate_triangle_concentration(
                self._graph, config.walk_length, item.walkers, coupling, 1, streams
            )[0]
            value = math.nan if sample.value is None else (sample.value - self._c_tri) ** 2
        else:
            ensemble = EnsembleConfig(
                walkers=item.walkers,
                p_term=config.p_term,
                coupling=coupling,
                termination=termination,
                seed=config.seed,
            )
            if self._kernel is not None:
                k_hat = estimate_gram(self._graph, config.sigma, ensemble, streams)
                value = frobenius_error(self._kernel, k_hat)
            elif self._attributes is not None:
                value = kernel_regression_experiment(
                    self._graph, self._attributes, config.test_fraction, config.sigma, ensemble, streams
                )
            else:
                assert self._pagerank is not None
                estimate = estimate_pagerank(
                    self._graph, config.p_term, item.walkers, coupling, streams, termination=termination
                )
                value = pagerank_error(self._pagerank, estimate.values)

        return ResultRow(
            task=config.task,
            graph=config.graph,
            scheme=item.scheme,
            m=item.walkers,
            trial=item.trial,
            metric=TASK_METRICS[config.task],
            value=value,
            seed=config.seed,
        )

    def run(self) -> RunResult:
        """Evaluate every work item, write the CSV and summarise the file as written."""
        config = self._config
        items = self.work_items()
        _LOGGER.info(
            "Running %s on %s: %d work items with %d worker(s)", config.task, config.graph, len(items), config.workers
        )
        if config.workers == 1:
            rows = [self.run_item(item) for item in items]
        else:
            chunksize = max(1, len(items) // (4 * config.workers))
            with ProcessPoolExecutor(max_workers=config.workers, mp_context=_POOL_CONTEXT) as executor:
                rows = list(executor.map(self.run_item, items, chunksize=chunksize))
        rows.sort(key=row_sort_key)
        write_results(config.output, rows)
        _LOGGER.info("Wrote %d rows to %s", len(rows), config.output)
        return RunResult(rows=rows, summary=aggregate(read_results(config.output)))
