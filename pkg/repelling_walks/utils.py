"""Utility functions for repelling walks."""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike

FLOAT_FORMAT = ".17g"


def format_float(value: float) -> str:
    """Format a float so it round-trips exactly through text."""
    return format(value, FLOAT_FORMAT)


def sample_variance_with_stderr(samples: ArrayLike) -> tuple[float, float]:
    """Unbiased sample variance and the standard error of that variance estimate."""
    values = np.asarray(samples, dtype=np.float64)
    squares = (values - values.mean()) ** 2
    variance = float(squares.sum() / (len(values) - 1))
    stderr = float(squares.std(ddof=1) / np.sqrt(len(values)))
    return variance, stderr

