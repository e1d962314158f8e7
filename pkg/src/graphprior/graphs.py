"""Compressed sparse row representation of simple undirected graphs.

All generator stages exchange graphs in this form: ``offsets`` of length
n+1 and ``indices`` holding each directed arc once per direction, with
neighbor lists sorted ascending. Self-loops and parallel edges are dropped
at construction time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True)
class GraphStructure:
    """Simple undirected graph in CSR form."""

    n_nodes: int
    offsets: np.ndarray  # int64, shape (n_nodes+1,), non-decreasing
    indices: np.ndarray  # int32, shape (offsets[-1],), sorted within each row

    @property
    def n_arcs(self) -> int:
        return int(self.offsets[-1])

    @property
    def n_edges(self) -> int:
        return self.n_arcs // 2

    def degrees(self) -> np.ndarray:
        return np.diff(self.offsets)

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.offsets[v] : self.offsets[v + 1]]

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Undirected edge list (u, v) with u < v."""
        src = np.repeat(np.arange(self.n_nodes, dtype=np.int32), self.degrees())
        keep = src < self.indices
        return src[keep], self.indices[keep]

    def edge_set(self) -> set[tuple[int, int]]:
        """Python set of (u, v) pairs with u < v. For tests and small graphs."""
        u, v = self.edge_arrays()
        return set(zip(u.tolist(), v.tolist()))

    def has_edges(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Vectorized membership test for node pairs (any order)."""
        keys = _pair_keys(self.n_nodes, u, v)
        table = self._edge_keys()
        if len(table) == 0:
            return np.zeros(len(keys), dtype=bool)
        pos = np.minimum(np.searchsorted(table, keys), len(table) - 1)
        return table[pos] == keys

    def _edge_keys(self) -> np.ndarray:
        u, v = self.edge_arrays()
        return np.sort(_pair_keys(self.n_nodes, u, v))

    def adjacency(self) -> sp.csr_matrix:
        """Scipy CSR adjacency with unit weights."""
        data = np.ones(self.n_arcs, dtype=np.float32)
        return sp.csr_matrix(
            (data, self.indices, self.offsets), shape=(self.n_nodes, self.n_nodes)
        )

    def validate(self) -> None:
        """Assert all structural invariants; raises ValueError on violation."""
        n = self.n_nodes
        if n < 0:
            raise ValueError("negative node count")
        if self.offsets.shape != (n + 1,) or self.offsets[0] != 0:
            raise ValueError("offsets malformed")
        if np.any(np.diff(self.offsets) < 0):
            raise ValueError("offsets not monotone")
        if self.offsets[-1] != len(self.indices):
            raise ValueError("offsets[-1] != len(indices)")
        if self.n_arcs:
            if self.indices.min() < 0 or self.indices.max() >= n:
                raise ValueError("neighbor index out of range")
        src = np.repeat(np.arange(n, dtype=np.int64), self.degrees())
        if np.any(src == self.indices):
            raise ValueError("self-loop present")
        # sorted + deduplicated within each row
        same_row = src[1:] == src[:-1]
        if np.any(same_row & (np.diff(self.indices.astype(np.int64)) <= 0)):
            raise ValueError("neighbor list not sorted strictly ascending")
        # symmetry: the arc multiset is closed under swap
        fwd = np.sort(src * n + self.indices)
        rev = np.sort(self.indices.astype(np.int64) * n + src)
        if not np.array_equal(fwd, rev):
            raise ValueError("arc set not symmetric")


def _pair_keys(n: int, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    lo = np.minimum(u, v).astype(np.int64)
    hi = np.maximum(u, v).astype(np.int64)
    return lo * n + hi


def empty_graph(n: int) -> GraphStructure:
    return GraphStructure(
        n_nodes=n,
        offsets=np.zeros(n + 1, dtype=np.int64),
        indices=np.zeros(0, dtype=np.int32),
    )


def from_edge_arrays(n: int, u: np.ndarray, v: np.ndarray) -> GraphStructure:
    """Build a simplified CSR graph from (possibly messy) endpoint arrays.

    Self-loops and duplicate edges are dropped; both arc directions are
    materialized. Accepts any integer dtype.
    """
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    if len(u) != len(v):
        raise ValueError("endpoint arrays differ in length")
    if len(u):
        if min(u.min(), v.min()) < 0 or max(u.max(), v.max()) >= n:
            raise ValueError("endpoint out of range")
    keep = u != v
    u, v = u[keep], v[keep]
    keys = np.unique(_pair_keys(n, u, v))
    lo = (keys // n).astype(np.int32)
    hi = (keys % n).astype(np.int32)
    return _csr_from_unique_edges(n, lo, hi)


def from_edge_set(n: int, edges: set[tuple[int, int]]) -> GraphStructure:
    """Inverse of edge_set(); for tests."""
    if not edges:
        return empty_graph(n)
    arr = np.asarray(sorted(edges), dtype=np.int64)
    return from_edge_arrays(n, arr[:, 0], arr[:, 1])


def _csr_from_unique_edges(n: int, lo: np.ndarray, hi: np.ndarray) -> GraphStructure:
    src = np.concatenate([lo, hi])
    dst = np.concatenate([hi, lo])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    counts = np.bincount(src, minlength=n)
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    return GraphStructure(n_nodes=n, offsets=offsets, indices=dst.astype(np.int32))


def from_csr_arrays(
    n: int, offsets: np.ndarray, indices: np.ndarray, validate: bool = True
) -> GraphStructure:
    """Wrap externally produced CSR arrays, optionally validating invariants."""
    g = GraphStructure(
        n_nodes=n,
        offsets=np.asarray(offsets, dtype=np.int64),
        indices=np.asarray(indices, dtype=np.int32),
    )
    if validate:
        g.validate()
    return g


@dataclass(frozen=True)
class LevelMapping:
    """Bijection from concatenated first-level node ids to second-level ids."""

    permutation: np.ndarray  # int64, a permutation of 0..N-1

    def validate(self) -> None:
        f = self.permutation
        if not np.array_equal(np.sort(f), np.arange(len(f))):
            raise ValueError("mapping is not a permutation")
