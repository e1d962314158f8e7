"""Shared graph builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from graphprior import GraphStructure, from_edge_set


def path_graph(n: int) -> GraphStructure:
    return from_edge_set(n, {(i, i + 1) for i in range(n - 1)})


def cycle_graph(n: int) -> GraphStructure:
    edges = {(i, (i + 1) % n) for i in range(n)}
    return from_edge_set(n, {(min(u, v), max(u, v)) for u, v in edges})


def complete_graph(n: int) -> GraphStructure:
    return from_edge_set(n, {(i, j) for i in range(n) for j in range(i + 1, n)})


def star_graph(n_leaves: int) -> GraphStructure:
    return from_edge_set(n_leaves + 1, {(0, i) for i in range(1, n_leaves + 1)})


def random_graph(n: int, p: float, rng: np.random.Generator) -> GraphStructure:
    """Erdos-Renyi-style graph, deterministic in the passed generator."""
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(len(iu)) < p
    return from_edge_set(n, set(zip(iu[keep].tolist(), ju[keep].tolist())))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
