"""Graph structure generation.

Pipeline: sample several first-level degree-corrected SBM graphs, overlay
them onto a second-level SBM draw through a random node bijection, then
grow low-degree periphery with a preferential-attachment pass.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import ArcOverflowError, GenerationError, SizeMismatchError
from .graphs import GraphStructure, LevelMapping, empty_graph, from_edge_arrays
from .rng import stream

if TYPE_CHECKING:
    from .prior_config import PriorSample

# indices are int32; arcs beyond this cannot be represented
MAX_ARCS = np.iinfo(np.int32).max


@dataclass(frozen=True)
class DcsbmParams:
    """Degree-corrected stochastic block model parameters.

    ``omega[r, s]`` is the expected number of edge endpoints between blocks
    r and s in the doubled convention: within-block edge counts have mean
    omega[r, r] / 2, cross-block counts mean omega[r, s]. ``theta`` holds
    per-node degree propensities normalized to sum to 1 within each block.
    """

    n: int
    block_sizes: np.ndarray  # int64, sums to n
    omega: np.ndarray  # float64, (B, B), symmetric, non-negative
    theta: np.ndarray  # float64, (n,), >= 0, sums to 1 per block

    @property
    def n_blocks(self) -> int:
        return len(self.block_sizes)

    def block_starts(self) -> np.ndarray:
        starts = np.zeros(self.n_blocks + 1, dtype=np.int64)
        np.cumsum(self.block_sizes, out=starts[1:])
        return starts

    def validate(self) -> None:
        if self.block_sizes.sum() != self.n:
            raise ValueError("block sizes do not sum to n")
        if np.any(self.block_sizes <= 0):
            raise ValueError("empty block")
        if self.omega.shape != (self.n_blocks, self.n_blocks):
            raise ValueError("omega shape mismatch")
        if not np.allclose(self.omega, self.omega.T):
            raise ValueError("omega not symmetric")
        if np.any(self.omega < 0) or np.any(self.theta < 0):
            raise ValueError("negative omega or theta")
        starts = self.block_starts()
        for r in range(self.n_blocks):
            block = self.theta[starts[r] : starts[r + 1]]
            if abs(block.sum() - 1.0) > 1e-9:
                raise ValueError(f"theta does not sum to 1 in block {r}")


@dataclass(frozen=True)
class BaParams:
    """Preferential-attachment augmentation parameters.

    Each new node draws its initial degree from a Zipf(a) capped at d_max
    and at the current node count.
    """

    n_new: int
    zipf_a: float
    d_max: int

    def validate(self) -> None:
        if self.n_new < 0:
            raise ValueError("n_new < 0")
        if self.zipf_a <= 1.0:
            raise ValueError("zipf exponent must exceed 1")
        if self.d_max < 1:
            raise ValueError("d_max < 1")


def sample_pair_counts(params: DcsbmParams, rng: np.random.Generator) -> np.ndarray:
    """Poisson block-pair edge counts, upper triangle populated.

    Entry (r, s) with r < s ~ Poisson(omega[r, s]); (r, r) ~
    Poisson(omega[r, r] / 2). These are pre-simplification counts.
    """
    b = params.n_blocks
    means = np.triu(params.omega, k=1) + np.diag(np.diag(params.omega) / 2.0)
    counts = np.zeros((b, b), dtype=np.int64)
    iu = np.triu_indices(b)
    counts[iu] = rng.poisson(means[iu])
    return counts


def sample_dcsbm(params: DcsbmParams, rng: np.random.Generator) -> GraphStructure:
    """One simplified draw from the degree-corrected SBM.

    Edge endpoints within a block are chosen with probability proportional
    to theta restricted to that block; self-loops and parallel edges are
    dropped afterwards.
    """
    expected = params.omega.sum() / 2.0
    if 2.0 * expected > 4.0 * MAX_ARCS:
        raise ArcOverflowError(
            f"expected {expected:.3g} edges exceeds representable arc budget"
        )
    counts = sample_pair_counts(params, rng)
    starts = params.block_starts()
    # per-block inverse-CDF tables over theta
    cdfs = [
        np.cumsum(params.theta[starts[r] : starts[r + 1]])
        for r in range(params.n_blocks)
    ]

    def draw_endpoints(r: int, m: int) -> np.ndarray:
        cdf = cdfs[r]
        total = cdf[-1]
        if total <= 0:  # block with all-zero propensity cannot host endpoints
            return np.full(m, -1, dtype=np.int64)
        picks = np.searchsorted(cdf, rng.random(m) * total, side="right")
        return starts[r] + np.minimum(picks, len(cdf) - 1)

    us, vs = [], []
    b = params.n_blocks
    for r in range(b):
        for s in range(r, b):
            m = int(counts[r, s])
            if m == 0:
                continue
            us.append(draw_endpoints(r, m))
            vs.append(draw_endpoints(s, m))
    if not us:
        return empty_graph(params.n)
    u = np.concatenate(us)
    v = np.concatenate(vs)
    ok = (u >= 0) & (v >= 0)
    return from_edge_arrays(params.n, u[ok], v[ok])


def combine_levels(
    first_level: list[GraphStructure],
    second_level: GraphStructure,
    rng: np.random.Generator,
    mapping: np.ndarray | None = None,
) -> tuple[GraphStructure, LevelMapping]:
    """Overlay first-level edges onto the second-level graph via a bijection.

    ``mapping`` forces a specific bijection (tests); by default a uniform
    random permutation is drawn. First-level node ids are concatenated in
    list order before mapping.
    """
    total = sum(g.n_nodes for g in first_level)
    if total != second_level.n_nodes:
        raise SizeMismatchError(
            f"first-level graphs hold {total} nodes, second level {second_level.n_nodes}"
        )
    if mapping is None:
        f = rng.permutation(total).astype(np.int64)
    else:
        f = np.asarray(mapping, dtype=np.int64)
        LevelMapping(f).validate()

    us = [second_level.edge_arrays()[0]]
    vs = [second_level.edge_arrays()[1]]
    base = 0
    for g in first_level:
        u, v = g.edge_arrays()
        us.append(f[u.astype(np.int64) + base])
        vs.append(f[v.astype(np.int64) + base])
        base += g.n_nodes
    combined = from_edge_arrays(
        total, np.concatenate(us), np.concatenate(vs)
    )
    return combined, LevelMapping(f)


def augment_preferential(
    graph: GraphStructure,
    params: BaParams,
    rng: np.random.Generator,
    forced_degrees: np.ndarray | None = None,
) -> GraphStructure:
    """Grow the graph with a random-initial-degree preferential process.

    New nodes arrive one at a time; node i draws degree
    d = min(Zipf(a), d_max, current node count) and attaches to d distinct
    existing nodes with probability proportional to degree + 1. Existing
    degrees update between insertions. ``forced_degrees`` overrides the
    Zipf draws (tests).
    """
    params.validate()
    if params.n_new == 0:
        return graph
    n0 = graph.n_nodes
    n_final = n0 + params.n_new

    if forced_degrees is None:
        degrees_new = np.minimum(rng.zipf(params.zipf_a, params.n_new), params.d_max)
    else:
        degrees_new = np.asarray(forced_degrees, dtype=np.int64)
        if len(degrees_new) != params.n_new:
            raise ValueError("forced_degrees length mismatch")

    # Sampling proportional to (degree + 1) == uniform over a pool holding
    # every node once plus one entry per incident arc.
    pool = np.empty(n0 + graph.n_arcs + 2 * int(degrees_new.sum()) + params.n_new,
                    dtype=np.int64)
    pool[:n0] = np.arange(n0)
    pool[n0 : n0 + graph.n_arcs] = graph.indices
    pool_len = n0 + graph.n_arcs

    new_u: list[np.ndarray] = []
    new_v: list[np.ndarray] = []
    for i in range(params.n_new):
        node = n0 + i
        d = int(min(degrees_new[i], node))
        targets = _draw_distinct(pool, pool_len, d, rng)
        new_u.append(np.full(d, node, dtype=np.int64))
        new_v.append(targets)
        pool[pool_len : pool_len + d] = targets
        pool[pool_len + d] = node  # the +1 smoothing entry for the new node
        pool[pool_len + d + 1 : pool_len + 2 * d + 1] = node
        pool_len += 2 * d + 1

    u0, v0 = graph.edge_arrays()
    u = np.concatenate([u0.astype(np.int64)] + new_u)
    v = np.concatenate([v0.astype(np.int64)] + new_v)
    return from_edge_arrays(n_final, u, v)


def _draw_distinct(
    pool: np.ndarray, pool_len: int, d: int, rng: np.random.Generator
) -> np.ndarray:
    """d distinct values drawn by rejection from pool[:pool_len].

    Repeated uniform pool draws with already-chosen values rejected, i.e.
    successive sampling without replacement under the pool weights.
    """
    out = np.empty(d, dtype=np.int64)
    seen: set[int] = set()
    found = 0
    while found < d:
        batch = pool[rng.integers(0, pool_len, size=d - found)]
        for t in batch.tolist():
            if t not in seen:
                seen.add(t)
                out[found] = t
                found += 1
    return out


def generate_structure(prior: "PriorSample") -> tuple[GraphStructure, LevelMapping]:
    """Full structure pipeline for one prior sample.

    Resamples with derived streams up to 16 attempts when the draw exceeds
    the edge cap, then falls back to uniform edge subsampling. Deterministic
    given the prior (which carries its seed).
    """
    if prior.n_total < 2:
        raise GenerationError(f"cannot generate a graph on {prior.n_total} nodes")
    max_edges = prior.max_edges
    graph = None
    mapping = None
    for attempt in range(16):
        rng = stream(prior.seed, "structure", attempt)
        first = [sample_dcsbm(p, rng) for p in prior.first_level_params]
        second = sample_dcsbm(prior.second_level_params, rng)
        combined, mapping = combine_levels(first, second, rng)
        graph = augment_preferential(combined, prior.ba_params, rng)
        if graph.n_edges <= max_edges:
            return graph, mapping
    sub_rng = stream(prior.seed, "edge_cap")
    u, v = graph.edge_arrays()
    keep = sub_rng.choice(len(u), size=max_edges, replace=False)
    trimmed = from_edge_arrays(graph.n_nodes, u[keep], v[keep])
    return trimmed, mapping
