"""CSV result rows.

One row per (scheme, m, trial) cell. The value column holds the task's
per-trial error metric:

- kernel-frobenius: relative Frobenius error ‖K̂ − K‖_F / ‖K‖_F.
- kernel-regression: mean angular error 1 − cos θ over held-out nodes.
- pagerank: L2 error ‖π̂ − π‖₂.
- graphlet: squared error (ĉ_tri − c_tri)² of the trial's triangle
  concentration estimate. A trial whose visited triples were all discarded
  has no estimate (its valid flag is false) and is written as nan; the
  summary counts those rows as invalid.
"""

from __future__ import annotations

from collections.abc import Iterable
import csv
import io
import math
from pathlib import Path

from .const import CSV_FIELDS, INVALID_VALUE
from .errors import AggregationError
from .types import ResultRow
from .utils import format_float


def row_sort_key(row: ResultRow) -> tuple[str, int, int]:
    """Canonical order: scheme, then m, then trial."""
    return row["scheme"], row["m"], row["trial"]


def _format_value(value: float) -> str:
    return INVALID_VALUE if math.isnan(value) else format_float(value)


def results_to_csv(rows: Iterable[ResultRow]) -> str:
    """Render rows in canonical order with the fixed header; identical rows give identical text."""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in sorted(rows, key=row_sort_key):
        writer.writerow({**row, "value": _format_value(row["value"])})
    return buffer.getvalue()


def write_results(path: Path, rows: Iterable[ResultRow]) -> None:
    """Write rows to a CSV file, creating parent directories as needed."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(results_to_csv(rows), encoding="utf-8")


def read_results(path: Path) -> list[ResultRow]:
    """Load rows written by write_results.

    Raises:
        AggregationError: Header does not match the result schema.

    """
    with path.open(encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        if tuple(reader.fieldnames or ()) != CSV_FIELDS:
            msg = f"{path} does not have the result header {','.join(CSV_FIELDS)}"
            raise AggregationError(msg)
        return [
            ResultRow(
                task=record["task"],
                graph=record["graph"],
                scheme=record["scheme"],
                m=int(record["m"]),
                trial=int(record["trial"]),
                metric=record["metric"],
                value=float(record["value"]),
                seed=int(record["seed"]),
            )
            for record in reader
        ]
