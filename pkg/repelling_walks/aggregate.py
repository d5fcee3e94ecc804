"""Per-(scheme, m) summary statistics of result rows."""

from __future__ import annotations

from collections import defaultdict
from collections.abc import Iterable
import math

import numpy as np

from .errors import AggregationError
from .types import ResultRow, SummaryRow


def aggregate(rows: Iterable[ResultRow]) -> list[SummaryRow]:
    """Mean, unbiased std and standard error of the mean per (scheme, m).

    NaN values mark invalid samples; they are excluded and counted. A cell
    with a single valid value reports std 0 with single_sample set.

    Raises:
        AggregationError: No rows, or a cell without any valid value.

    """
    cells: defaultdict[tuple[str, int], list[float]] = defaultdict(list)
    for row in rows:
        cells[row["scheme"], row["m"]].append(row["value"])
    if not cells:
        msg = "Nothing to aggregate"
        raise AggregationError(msg)

    summary: list[SummaryRow] = []
    for (scheme, m), values in sorted(cells.items()):
        valid = np.array([value for value in values if not math.isnan(value)])
        if valid.size == 0:
            msg = f"Every row for scheme {scheme}, m={m} is invalid"
            raise AggregationError(msg)
        single = valid.size == 1
        std = 0.0 if single else float(valid.std(ddof=1))
        summary.append(
            SummaryRow(
                scheme=scheme,
                m=m,
                mean=float(valid.mean()),
                std=std,
                stderr=std / math.sqrt(valid.size),
                n_valid=int(valid.size),
                n_invalid=len(values) - int(valid.size),
                single_sample=single,
            )
        )
    return summary


def format_summary_line(row: SummaryRow) -> str:
    """Render "<scheme> m=<m>: <mean> ± <stderr> (n=<n_valid>[, invalid=<k>])"."""
    counts = f"n={row['n_valid']}"
    if row["n_invalid"]:
        counts += f", invalid={row['n_invalid']}"
    return f"{row['scheme']} m={row['m']}: {row['mean']:.6g} ± {row['stderr']:.2g} ({counts})"
