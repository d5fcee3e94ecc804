"""Experiment configuration: validation of CLI and JSON settings."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
import json
import logging
from pathlib import Path
from typing import Any

import voluptuous as vol

from .const import (
    CONF_ATTRIBUTES,
    CONF_GRAPH,
    CONF_M_VALUES,
    CONF_OUTPUT,
    CONF_P_TERM,
    CONF_SCHEMES,
    CONF_SEED,
    CONF_SIGMA,
    CONF_TASK,
    CONF_TEST_FRACTION,
    CONF_TRIALS,
    CONF_WALK_LENGTH,
    CONF_WORKERS,
    DEFAULT_KERNEL_P_TERM,
    DEFAULT_M_VALUES,
    DEFAULT_OUTPUT,
    DEFAULT_PAGERANK_P_TERM,
    DEFAULT_SCHEMES,
    DEFAULT_SEED,
    DEFAULT_SIGMA,
    DEFAULT_TEST_FRACTION,
    DEFAULT_TRIALS,
    DEFAULT_WALK_LENGTH,
    DEFAULT_WORKERS,
    KERNEL_ONLY_SCHEMES,
    KERNEL_TASKS,
    MIN_WALK_LENGTH,
    SCHEME_CODES,
    TASK_GRAPHLET,
    TASKS,
)
from .errors import ExperimentConfigError
from .types import ExperimentConfigData

_LOGGER = logging.getLogger(__name__)

MAX_SEED = 2**64 - 1


def _split_list(value: Any) -> list[Any]:
    """Accept "a,b,c" from the command line as well as JSON lists."""
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    if isinstance(value, list | tuple):
        return list(value)  # pyright: ignore[reportUnknownArgumentType]
    msg = "expected a comma-separated string or a list"
    raise vol.Invalid(msg)


_POSITIVE_INT = vol.All(vol.Coerce(int), vol.Range(min=1))
_OPEN_UNIT = vol.All(vol.Coerce(float), vol.Range(min=0, max=1, min_included=False, max_included=False))

CONFIG_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_TASK): vol.In(TASKS),
        vol.Required(CONF_GRAPH): vol.All(str, vol.Length(min=1)),
        vol.Optional(CONF_SCHEMES, default=list(DEFAULT_SCHEMES)): vol.All(
            _split_list, [vol.In(SCHEME_CODES)], vol.Length(min=1)
        ),
        vol.Optional(CONF_M_VALUES, default=list(DEFAULT_M_VALUES)): vol.All(
            _split_list, [_POSITIVE_INT], vol.Length(min=1)
        ),
        vol.Optional(CONF_P_TERM): _OPEN_UNIT,
        vol.Optional(CONF_SIGMA, default=DEFAULT_SIGMA): vol.All(
            vol.Coerce(float), vol.Range(min=0, min_included=False)
        ),
        vol.Optional(CONF_WALK_LENGTH, default=DEFAULT_WALK_LENGTH): vol.All(
            vol.Coerce(int), vol.Range(min=MIN_WALK_LENGTH)
        ),
        vol.Optional(CONF_TRIALS, default=DEFAULT_TRIALS): _POSITIVE_INT,
        vol.Optional(CONF_SEED, default=DEFAULT_SEED): vol.All(vol.Coerce(int), vol.Range(min=0, max=MAX_SEED)),
        vol.Optional(CONF_OUTPUT, default=DEFAULT_OUTPUT): vol.All(str, vol.Length(min=1)),
        vol.Optional(CONF_WORKERS, default=DEFAULT_WORKERS): _POSITIVE_INT,
        vol.Optional(CONF_ATTRIBUTES, default=None): vol.Any(None, vol.All(str, vol.Length(min=1))),
        vol.Optional(CONF_TEST_FRACTION, default=DEFAULT_TEST_FRACTION): _OPEN_UNIT,
    }
)


@dataclass(frozen=True, slots=True)
class ExperimentConfig:
    """Validated settings of one benchmark run."""

    task: str
    graph: str
    schemes: tuple[str, ...]
    m_values: tuple[int, ...]
    p_term: float
    sigma: float
    walk_length: int
    trials: int
    seed: int
    output: Path
    workers: int
    attributes: Path | None
    test_fraction: float

    @property
    def is_kernel_task(self) -> bool:
        """Whether the task estimates the Laplacian kernel."""
        return self.task in KERNEL_TASKS


def parse_config(data: Mapping[str, Any]) -> ExperimentConfig:
    """Validate a raw settings mapping.

    The termination probability defaults per task (0.5 for kernel tasks, 0.3
    for PageRank); graphlet walks never terminate and ignore it.

    Raises:
        ExperimentConfigError: Schema violations, or antithetic schemes on a
            non-kernel task.

    """
    try:
        validated: dict[str, Any] = CONFIG_SCHEMA(dict(data))
    except vol.Invalid as err:
        msg = f"Invalid experiment config: {err}"
        raise ExperimentConfigError(msg) from err

    task: str = validated[CONF_TASK]
    schemes = tuple(dict.fromkeys(validated[CONF_SCHEMES]))
    if task not in KERNEL_TASKS:
        kernel_only = sorted(KERNEL_ONLY_SCHEMES.intersection(schemes))
        if kernel_only:
            msg = f"Schemes {', '.join(kernel_only)} are only available for kernel tasks, not {task}"
            raise ExperimentConfigError(msg)

    p_term = validated.get(CONF_P_TERM)
    if p_term is None:
        p_term = DEFAULT_KERNEL_P_TERM if task in KERNEL_TASKS else DEFAULT_PAGERANK_P_TERM
    if task == TASK_GRAPHLET:
        p_term = 0.0

    attributes = validated[CONF_ATTRIBUTES]
    config = ExperimentConfig(
        task=task,
        graph=validated[CONF_GRAPH],
        schemes=schemes,
        m_values=tuple(dict.fromkeys(validated[CONF_M_VALUES])),
        p_term=p_term,
        sigma=validated[CONF_SIGMA],
        walk_length=validated[CONF_WALK_LENGTH],
        trials=validated[CONF_TRIALS],
        seed=validated[CONF_SEED],
        output=Path(validated[CONF_OUTPUT]),
        workers=validated[CONF_WORKERS],
        attributes=Path(attributes) if attributes is not None else None,
        test_fraction=validated[CONF_TEST_FRACTION],
    )
    _LOGGER.debug("Parsed experiment config: %s", config)
    return config


def load_json_config(path: Path) -> ExperimentConfigData:
    """Read raw settings from a JSON object file.

    Raises:
        ExperimentConfigError: Unreadable file, invalid JSON or a non-object document.

    """
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as err:
        msg = f"Cannot read config file {path}: {err}"
        raise ExperimentConfigError(msg) from err
    except json.JSONDecodeError as err:
        msg = f"Config file {path} is not valid JSON: {err}"
        raise ExperimentConfigError(msg) from err
    if not isinstance(data, dict):
        msg = f"Config file {path} must contain a JSON object"
        raise ExperimentConfigError(msg)
    return data  # pyright: ignore[reportUnknownVariableType]
