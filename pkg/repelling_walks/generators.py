"""Synthetic graph generators and the generator mini-language."""

from __future__ import annotations

from collections.abc import Callable
import logging
from pathlib import Path

import networkx as nx
import voluptuous as vol

from .const import MAX_GENERATOR_ATTEMPTS
from .corpus import corpus_graph, corpus_names
from .errors import GeneratorError
from .graph import Graph, read_edge_list
from .types import GraphSpecParams

_LOGGER = logging.getLogger(__name__)


def from_networkx(g: nx.Graph) -> Graph:
    """Convert a networkx graph, relabelling nodes densely in sorted order.

    Edge weights are dropped; every generated graph is unit-weight.
    """
    order = sorted(g.nodes())
    index = {node: i for i, node in enumerate(order)}
    edges = [(index[u], index[v]) for u, v in g.edges()]
    return Graph.from_edges(len(order), edges, labels=[str(node) for node in order])


def _connected_sample(kind: str, seed: int, build: Callable[[int], nx.Graph]) -> Graph:
    """Resample with an incremented sub-seed until the graph is connected."""
    for attempt in range(MAX_GENERATOR_ATTEMPTS):
        g = build(seed + attempt)
        if g.number_of_nodes() > 1 and nx.is_connected(g):
            if attempt:
                _LOGGER.debug("%s graph connected after %d resamples", kind, attempt)
            return from_networkx(g)
    msg = f"No connected {kind} graph after {MAX_GENERATOR_ATTEMPTS} attempts"
    raise GeneratorError(msg)


def gen_erdos_renyi(n: int, p_edge: float, seed: int) -> Graph:
    """Connected G(n, p) sample with unit weights."""
    if n < 2 or not 0 < p_edge <= 1:  # noqa: PLR2004
        msg = f"Erdős-Rényi needs n >= 2 and 0 < p <= 1, got n={n}, p={p_edge}"
        raise GeneratorError(msg)
    return _connected_sample("Erdős-Rényi", seed, lambda s: nx.gnp_random_graph(n, p_edge, seed=s))


def gen_d_regular(n: int, d: int, seed: int) -> Graph:
    """Connected random d-regular graph with unit weights."""
    if d < 1 or d >= n or (n * d) % 2:
        msg = f"No {d}-regular graph on {n} nodes"
        raise GeneratorError(msg)
    return _connected_sample(f"{d}-regular", seed, lambda s: nx.random_regular_graph(d, n, seed=s))


def gen_binary_tree(depth: int) -> Graph:
    """Complete binary tree with 2**(depth + 1) - 1 nodes."""
    if depth < 1:
        msg = f"Binary tree depth must be at least 1, got {depth}"
        raise GeneratorError(msg)
    return from_networkx(nx.balanced_tree(2, depth))


def gen_grid_2d(rows: int, cols: int) -> Graph:
    """Rows x cols lattice; node (r, c) has id r * cols + c."""
    if rows < 1 or cols < 1 or rows * cols < 2:  # noqa: PLR2004
        msg = f"Grid needs at least two nodes, got {rows}x{cols}"
        raise GeneratorError(msg)
    lattice = nx.grid_2d_graph(rows, cols)
    return from_networkx(nx.relabel_nodes(lattice, {(r, c): grid_node(r, c, cols) for r, c in lattice}))


def karate_club() -> Graph:
    """Zachary's karate club (34 nodes, 78 edges) with unit weights."""
    return from_networkx(nx.karate_club_graph())


def grid_node(row: int, col: int, cols: int) -> int:
    """Node id of lattice position (row, col) in gen_grid_2d."""
    return row * cols + col


# =============================================================================
# Generator mini-language
# =============================================================================

_POSITIVE_INT = vol.All(vol.Coerce(int), vol.Range(min=1))

_SPEC_SCHEMAS: dict[str, vol.Schema] = {
    "er": vol.Schema(
        {
            vol.Required("n"): vol.All(vol.Coerce(int), vol.Range(min=2)),
            vol.Required("p"): vol.All(vol.Coerce(float), vol.Range(min=0, max=1, min_included=False)),
            vol.Optional("seed", default=0): vol.Coerce(int),
        }
    ),
    "dreg": vol.Schema(
        {
            vol.Required("n"): vol.All(vol.Coerce(int), vol.Range(min=2)),
            vol.Required("d"): _POSITIVE_INT,
            vol.Optional("seed", default=0): vol.Coerce(int),
        }
    ),
    "tree": vol.Schema({vol.Required("depth"): _POSITIVE_INT}),
    "grid": vol.Schema({vol.Required("rows"): _POSITIVE_INT, vol.Required("cols"): _POSITIVE_INT}),
}


def _parse_params(kind: str, body: str) -> GraphSpecParams:
    """Split "k=v,k=v" (or "RxC" for grids) and validate against the kind's schema."""
    raw: dict[str, str] = {}
    if kind == "grid" and "=" not in body:
        rows, sep, cols = body.partition("x")
        if not sep:
            msg = f"Grid spec must look like grid:RxC, got {body!r}"
            raise GeneratorError(msg)
        raw = {"rows": rows, "cols": cols}
    else:
        for item in filter(None, (part.strip() for part in body.split(","))):
            key, sep, value = item.partition("=")
            if not sep:
                msg = f"Expected key=value in graph spec, got {item!r}"
                raise GeneratorError(msg)
            raw[key.strip()] = value.strip()
    try:
        return _SPEC_SCHEMAS[kind](raw)
    except vol.Invalid as err:
        msg = f"Invalid {kind} graph spec: {err}"
        raise GeneratorError(msg) from err


def parse_graph_spec(spec: str) -> Graph:
    """Build a graph from a generator string, corpus name, "karate" or file path.

    Examples: "er:n=100,p=0.4,seed=7", "tree:depth=6", "grid:8x8",
    "dreg:n=100,d=3,seed=7", "karate", "K4", "graphs/eurosis.txt".
    """
    kind, sep, body = spec.partition(":")
    if sep and kind in _SPEC_SCHEMAS:
        params = _parse_params(kind, body)
        _LOGGER.debug("Generating %s graph with %s", kind, params)
        if kind == "er":
            return gen_erdos_renyi(params["n"], params["p"], params["seed"])
        if kind == "dreg":
            return gen_d_regular(params["n"], params["d"], params["seed"])
        if kind == "tree":
            return gen_binary_tree(params["depth"])
        return gen_grid_2d(params["rows"], params["cols"])
    if spec == "karate":
        return karate_club()
    if spec in corpus_names():
        return corpus_graph(spec)
    path = Path(spec)
    if path.is_file():
        return read_edge_list(path)
    msg = f"Unknown graph spec {spec!r} (not a generator, corpus name or file)"
    raise GeneratorError(msg)
