"""Repelling random walks: coupled walker ensembles for graph estimators."""

from __future__ import annotations

from .graph import Graph
from .walks import CouplingScheme, EnsembleConfig, RandomStreams, TerminationScheme, WalkRecord, simulate_ensemble

__all__ = [
    "CouplingScheme",
    "EnsembleConfig",
    "Graph",
    "RandomStreams",
    "TerminationScheme",
    "WalkRecord",
    "simulate_ensemble",
]
