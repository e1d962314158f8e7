"""Pretraining episodes: context/query splits and masked-edge samples.

An episode hides a random fraction of edges (positives), pairs them with
an equal number of uniformly drawn non-edges (negatives), and exposes the
graph with the positives removed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SaturationError
from .graphs import GraphStructure, from_edge_arrays
from .scm import AttributedGraphDataset

NEGATIVE_BUDGET_FACTOR = 100


@dataclass(frozen=True)
class Episode:
    context_mask: np.ndarray  # (n,) bool; True = context node
    mgm_positives: np.ndarray  # (p, 2) int64, removed undirected edges
    mgm_negatives: np.ndarray  # (p, 2) int64, sampled non-edges
    pruned_graph: GraphStructure

    @property
    def n_positives(self) -> int:
        return self.mgm_positives.shape[0]

    def validate(self, graph: GraphStructure) -> None:
        n = graph.n_nodes
        if self.context_mask.shape != (n,) or self.context_mask.dtype != np.bool_:
            raise ValueError("bad context mask")
        n_ctx = int(self.context_mask.sum())
        if not 1 <= n_ctx <= n - 1:
            raise ValueError("context/query masks must both be non-empty")
        if self.mgm_positives.shape != self.mgm_negatives.shape:
            raise ValueError("positive/negative count mismatch")
        edges = graph.edge_set()
        pos = {(int(u), int(v)) for u, v in self.mgm_positives}
        neg = {(int(u), int(v)) for u, v in self.mgm_negatives}
        if len(pos) != self.n_positives or len(neg) != self.n_positives:
            raise ValueError("duplicate sampled pairs")
        if any(u == v for u, v in pos | neg):
            raise ValueError("self-pair sampled")
        if not pos <= edges:
            raise ValueError("positive not an edge")
        if neg & edges:
            raise ValueError("negative is an edge")
        if self.pruned_graph.edge_set() != edges - pos:
            raise ValueError("pruned graph is not E minus positives")


def split_context_query(n: int, fraction: float, rng: np.random.Generator) -> np.ndarray:
    """Boolean mask with max(1, round(fraction*n)) context nodes, capped
    so at least one query node remains."""
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must be in (0, 1)")
    if n < 2:
        raise ValueError("need at least 2 nodes")
    n_ctx = min(max(1, int(round(fraction * n))), n - 1)
    mask = np.zeros(n, dtype=bool)
    mask[rng.choice(n, size=n_ctx, replace=False)] = True
    return mask


def sample_mgm(
    graph: GraphStructure, fraction: float, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, GraphStructure]:
    """Masked-graph-modeling sample: floor(fraction*|E|) edges removed as
    positives, equally many distinct non-edges as negatives, and the graph
    without the positives.

    Negatives come from rejection sampling with a budget of
    NEGATIVE_BUDGET_FACTOR draws per required pair; exhausting it (near
    densities above 0.99) raises SaturationError.
    """
    n = graph.n_nodes
    eu, ev = graph.edge_arrays()
    m = len(eu)
    n_pos = int(np.floor(fraction * m))
    if n_pos == 0:
        empty = np.zeros((0, 2), dtype=np.int64)
        return empty, empty.copy(), graph

    chosen = rng.choice(m, size=n_pos, replace=False)
    positives = np.stack([eu[chosen], ev[chosen]], axis=1).astype(np.int64)
    negatives = _sample_non_edges(graph, n_pos, rng)

    keep = np.ones(m, dtype=bool)
    keep[chosen] = False
    pruned = from_edge_arrays(n, eu[keep], ev[keep])
    return positives, negatives, pruned


def _sample_non_edges(
    graph: GraphStructure, count: int, rng: np.random.Generator
) -> np.ndarray:
    """Uniform distinct unordered non-adjacent pairs, in encounter order."""
    n = graph.n_nodes
    total_pairs = n * (n - 1) // 2
    if total_pairs - graph.n_edges < count:
        raise SaturationError(
            f"graph has fewer than {count} non-edges to sample"
        )
    budget = NEGATIVE_BUDGET_FACTOR * count
    found_keys: list[int] = []
    seen: set[int] = set()
    out = np.empty((count, 2), dtype=np.int64)
    attempts = 0
    while len(found_keys) < count:
        if attempts >= budget:
            raise SaturationError(
                f"negative sampling exhausted {budget} draws "
                f"({len(found_keys)}/{count} found)"
            )
        chunk = min(max(2 * (count - len(found_keys)), 64), budget - attempts)
        attempts += chunk
        u = rng.integers(0, n, size=chunk)
        v = rng.integers(0, n, size=chunk)
        ok = u != v
        u, v = u[ok], v[ok]
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        ok = ~graph.has_edges(lo, hi)
        lo, hi = lo[ok], hi[ok]
        keys = lo * n + hi
        # First occurrence within the chunk, in draw order, to keep the
        # distinct-pair distribution uniform.
        _, first = np.unique(keys, return_index=True)
        for idx in np.sort(first):
            key = int(keys[idx])
            if key in seen:
                continue
            seen.add(key)
            out[len(found_keys)] = (key // n, key % n)
            found_keys.append(key)
            if len(found_keys) == count:
                break
    return out


def build_episode(dataset: AttributedGraphDataset, rng: np.random.Generator) -> Episode:
    """Context split plus MGM sample using the dataset's sampled fractions."""
    prior = dataset.prior
    context_mask = split_context_query(
        dataset.graph.n_nodes, prior.context_fraction, rng
    )
    positives, negatives, pruned = sample_mgm(
        dataset.graph, prior.mgm_fraction, rng
    )
    return Episode(
        context_mask=context_mask,
        mgm_positives=positives,
        mgm_negatives=negatives,
        pruned_graph=pruned,
    )
