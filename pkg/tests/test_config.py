"""Tests for experiment configuration validation."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from repelling_walks.config import load_json_config, parse_config
from repelling_walks.const import (
    DEFAULT_KERNEL_P_TERM,
    DEFAULT_M_VALUES,
    DEFAULT_OUTPUT,
    DEFAULT_PAGERANK_P_TERM,
    DEFAULT_SCHEMES,
    DEFAULT_TRIALS,
)
from repelling_walks.errors import ExperimentConfigError


class TestParseConfig:
    """Tests for parse_config."""

    def test_defaults_are_filled_in(self) -> None:
        """Test that only task and graph are required."""
        config = parse_config({"task": "pagerank", "graph": "karate"})

        assert config.schemes == DEFAULT_SCHEMES
        assert config.m_values == DEFAULT_M_VALUES
        assert config.trials == DEFAULT_TRIALS
        assert config.output == Path(DEFAULT_OUTPUT)
        assert config.attributes is None
        assert config.workers == 1

    @pytest.mark.parametrize(
        ("task", "expected"),
        [
            ("kernel-frobenius", DEFAULT_KERNEL_P_TERM),
            ("kernel-regression", DEFAULT_KERNEL_P_TERM),
            ("pagerank", DEFAULT_PAGERANK_P_TERM),
            ("graphlet", 0.0),
        ],
    )
    def test_termination_default_depends_on_task(self, task: str, expected: float) -> None:
        """Test that p_term falls back to the task default."""
        config = parse_config({"task": task, "graph": "karate"})

        assert config.p_term == expected

    def test_graphlet_ignores_termination(self) -> None:
        """Test that graphlet walks never terminate even when p_term is given."""
        config = parse_config({"task": "graphlet", "graph": "karate", "pterm": 0.4})

        assert config.p_term == 0.0

    def test_comma_separated_lists(self) -> None:
        """Test that CLI-style strings become typed tuples without duplicates."""
        config = parse_config({"task": "kernel-frobenius", "graph": "K4", "schemes": "iid, ar,iid", "m": "2,4,2"})

        assert config.schemes == ("iid", "ar")
        assert config.m_values == (2, 4)
        assert config.is_kernel_task

    def test_json_lists(self) -> None:
        """Test that JSON lists are accepted as well."""
        config = parse_config({"task": "pagerank", "graph": "K4", "schemes": ["tr"], "m": [8]})

        assert config.schemes == ("tr",)
        assert config.m_values == (8,)

    @pytest.mark.parametrize(
        "overrides",
        [
            {"task": "clustering"},
            {"graph": ""},
            {"schemes": "iid,q"},
            {"m": "0"},
            {"pterm": 1.0},
            {"pterm": 0.0},
            {"sigma": 0.0},
            {"walk_len": 2},
            {"trials": 0},
            {"seed": -1},
            {"workers": 0},
            {"test_fraction": 1.5},
            {"unknown": 1},
        ],
    )
    def test_invalid_values_are_rejected(self, overrides: dict[str, object]) -> None:
        """Test that schema violations raise ExperimentConfigError."""
        data: dict[str, object] = {"task": "kernel-frobenius", "graph": "karate", **overrides}

        with pytest.raises(ExperimentConfigError, match="Invalid experiment config"):
            parse_config(data)

    def test_missing_graph_is_rejected(self) -> None:
        """Test that graph is mandatory."""
        with pytest.raises(ExperimentConfigError):
            parse_config({"task": "pagerank"})

    @pytest.mark.parametrize("scheme", ["a", "ar"])
    def test_antithetic_only_for_kernel_tasks(self, scheme: str) -> None:
        """Test that antithetic schemes are refused outside kernel estimation."""
        with pytest.raises(ExperimentConfigError, match="only available for kernel tasks"):
            parse_config({"task": "pagerank", "graph": "karate", "schemes": f"iid,{scheme}"})


class TestLoadJsonConfig:
    """Tests for load_json_config."""

    def test_reads_object(self, tmp_path: Path) -> None:
        """Test that a JSON object is returned as settings."""
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"task": "pagerank", "graph": "K4", "m": [2]}), encoding="utf-8")

        data = load_json_config(path)

        assert data == {"task": "pagerank", "graph": "K4", "m": [2]}

    def test_missing_file(self, tmp_path: Path) -> None:
        """Test that an unreadable file raises ExperimentConfigError."""
        with pytest.raises(ExperimentConfigError, match="Cannot read config file"):
            load_json_config(tmp_path / "missing.json")

    def test_invalid_json(self, tmp_path: Path) -> None:
        """Test that malformed JSON raises ExperimentConfigError."""
        path = tmp_path / "bad.json"
        path.write_text("{task: pagerank", encoding="utf-8")

        with pytest.raises(ExperimentConfigError, match="not valid JSON"):
            load_json_config(path)

    def test_non_object(self, tmp_path: Path) -> None:
        """Test that a JSON array is refused."""
        path = tmp_path / "list.json"
        path.write_text("[1, 2]", encoding="utf-8")

        with pytest.raises(ExperimentConfigError, match="must contain a JSON object"):
            load_json_config(path)
