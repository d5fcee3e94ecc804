"""Pytest fixtures for repelling walks tests."""

from __future__ import annotations

import numpy as np
import pytest

from repelling_walks.corpus import corpus_graph
from repelling_walks.generators import gen_grid_2d, karate_club
from repelling_walks.graph import Graph
from repelling_walks.walks import RandomStreams


@pytest.fixture
def path3() -> Graph:
    """Return the path 0-1-2."""
    return corpus_graph("P3")


@pytest.fixture
def path5() -> Graph:
    """Return the path 0-1-2-3-4."""
    return corpus_graph("P5")


@pytest.fixture
def cycle4() -> Graph:
    """Return the 4-cycle."""
    return corpus_graph("C4")


@pytest.fixture
def triangle() -> Graph:
    """Return the complete graph on three nodes."""
    return corpus_graph("K3")


@pytest.fixture
def complete4() -> Graph:
    """Return the complete graph on four nodes."""
    return corpus_graph("K4")


@pytest.fixture
def star4() -> Graph:
    """Return the star with centre 0 and four leaves."""
    return corpus_graph("star-4")


@pytest.fixture
def karate() -> Graph:
    """Return Zachary's karate club."""
    return karate_club()


@pytest.fixture
def grid4() -> Graph:
    """Return the 4x4 lattice."""
    return gen_grid_2d(4, 4)


@pytest.fixture
def grid8() -> Graph:
    """Return the 8x8 lattice."""
    return gen_grid_2d(8, 8)


@pytest.fixture
def streams() -> RandomStreams:
    """Return streams with a fixed seed."""
    return RandomStreams(12345)


@pytest.fixture
def rng() -> np.random.Generator:
    """Return a generator with a fixed seed."""
    return np.random.default_rng(2024)
