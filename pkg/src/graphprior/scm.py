"""Graph-aware structural causal model for node attributes and targets.

Random inputs (optionally concatenated with Laplacian positional
encodings) are pushed through a randomly wired network whose neurons are
either plain MLP units or neighborhood-averaging GNN units; selected
hidden neurons become the observed features and the target.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable

import numpy as np
import scipy.sparse as sp

from .errors import (
    AttributeGenerationError,
    DegenerateTargetError,
    InsufficientNeuronsError,
    NumericOverflowError,
)
from .graphs import GraphStructure
from .rng import stream
from .spectral import laplacian_pe

if TYPE_CHECKING:
    from .prior_config import PriorSample, Task

OVERFLOW_LIMIT = 1e12
MOMENT_TOL = 1e-4
_BIAS_STD = 0.1

_ACTIVATION_FNS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "identity": lambda x: x,
    "tanh": np.tanh,
    "relu": lambda x: np.maximum(x, 0.0),
    "sine": np.sin,
    "abs": np.abs,
}


@dataclass(frozen=True)
class ScmParams:
    n_layers: int
    hidden_width: int
    activations: tuple[str, ...]  # one per layer
    input_dim: int
    weight_scale: float
    mixing_p: float
    use_lappe: bool
    lappe_k: int
    noise_scale: float

    @property
    def in_width(self) -> int:
        """First-layer input width including the optional LapPE block."""
        return self.input_dim + (self.lappe_k if self.use_lappe else 0)

    def validate(self) -> None:
        if self.n_layers < 1 or self.hidden_width < 2 or self.input_dim < 1:
            raise ValueError("SCM dimensions out of range")
        if len(self.activations) != self.n_layers:
            raise ValueError("need one activation per layer")
        if any(a not in _ACTIVATION_FNS for a in self.activations):
            raise ValueError("unknown activation")


@dataclass(frozen=True)
class ScmNetwork:
    """Sampled weights and per-neuron type masks; mask True means GNN."""

    params: ScmParams
    mlp_weights: tuple[np.ndarray, ...]  # (hidden, in) float32 per layer
    mlp_biases: tuple[np.ndarray, ...]
    gnn_weights: tuple[np.ndarray, ...]
    gnn_biases: tuple[np.ndarray, ...]
    masks: tuple[np.ndarray, ...]  # bool (hidden,) per layer

    @property
    def total_neurons(self) -> int:
        return self.params.n_layers * self.params.hidden_width


def sample_scm(params: ScmParams, rng: np.random.Generator) -> ScmNetwork:
    """Draw network weights and MLP/GNN type masks.

    Weights are normal with std weight_scale / sqrt(fan_in); every neuron
    is independently GNN-type with probability mixing_p.
    """
    params.validate()
    h = params.hidden_width
    mlp_w, mlp_b, gnn_w, gnn_b, masks = [], [], [], [], []
    in_width = params.in_width
    for layer in range(params.n_layers):
        std = np.float32(params.weight_scale / np.sqrt(in_width))
        mlp_w.append(rng.standard_normal((h, in_width), dtype=np.float32) * std)
        mlp_b.append(rng.standard_normal(h, dtype=np.float32) * np.float32(_BIAS_STD))
        gnn_w.append(rng.standard_normal((h, in_width), dtype=np.float32) * std)
        gnn_b.append(rng.standard_normal(h, dtype=np.float32) * np.float32(_BIAS_STD))
        masks.append(rng.random(h) < params.mixing_p)
        in_width = h
    return ScmNetwork(
        params=params,
        mlp_weights=tuple(mlp_w),
        mlp_biases=tuple(mlp_b),
        gnn_weights=tuple(gnn_w),
        gnn_biases=tuple(gnn_b),
        masks=tuple(masks),
    )


def gnn_aggregate(H: np.ndarray, graph: GraphStructure) -> np.ndarray:
    """Neighbor mean of each row; isolated nodes map to zero rows."""
    adj = graph.adjacency()
    return _aggregate(H, adj, _inv_degrees(graph))


def _inv_degrees(graph: GraphStructure) -> np.ndarray:
    deg = graph.degrees().astype(np.float32)
    return np.where(deg > 0, 1.0 / np.maximum(deg, 1.0), 0.0).astype(np.float32)


def _aggregate(H: np.ndarray, adj: sp.csr_matrix, inv_deg: np.ndarray) -> np.ndarray:
    return (adj @ H) * inv_deg[:, None]


def propagate(
    scm: ScmNetwork,
    graph: GraphStructure,
    inputs: np.ndarray,
    rng: np.random.Generator,
) -> list[np.ndarray]:
    """Run inputs through the network; returns every hidden layer matrix.

    Per layer, MLP-type neurons transform the previous layer directly and
    GNN-type neurons transform its neighbor mean; Gaussian noise with the
    configured scale is added afterwards. Raises NumericOverflowError when
    activations leave the representable range.
    """
    params = scm.params
    n = graph.n_nodes
    if inputs.shape != (n, params.in_width):
        raise ValueError(f"inputs shape {inputs.shape} != ({n}, {params.in_width})")
    h = params.hidden_width
    needs_graph = any(m.any() for m in scm.masks)
    adj = graph.adjacency() if needs_graph else None
    inv_deg = _inv_degrees(graph) if needs_graph else None

    layers: list[np.ndarray] = []
    current = np.ascontiguousarray(inputs, dtype=np.float32)
    for layer in range(params.n_layers):
        act = _ACTIVATION_FNS[params.activations[layer]]
        mask = scm.masks[layer]
        out = np.empty((n, h), dtype=np.float32)
        mlp_idx = np.flatnonzero(~mask)
        gnn_idx = np.flatnonzero(mask)
        if len(mlp_idx):
            w, b = scm.mlp_weights[layer], scm.mlp_biases[layer]
            out[:, mlp_idx] = act(current @ w[mlp_idx].T + b[mlp_idx])
        if len(gnn_idx):
            w, b = scm.gnn_weights[layer], scm.gnn_biases[layer]
            agg = _aggregate(current, adj, inv_deg)
            out[:, gnn_idx] = act(agg @ w[gnn_idx].T + b[gnn_idx])
        noise = rng.standard_normal((n, h), dtype=np.float32)
        out += np.float32(params.noise_scale) * noise
        if not np.isfinite(out).all() or np.abs(out).max(initial=0.0) > OVERFLOW_LIMIT:
            raise NumericOverflowError(f"activation overflow at layer {layer}")
        layers.append(out)
        current = out
    return layers


def _standardize_columns(x: np.ndarray) -> np.ndarray:
    """Zero-mean unit-variance columns in float64; constant columns to zero."""
    x = x.astype(np.float64)
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    out = np.zeros_like(x)
    ok = std > 0
    out[:, ok] = (x[:, ok] - mean[ok]) / std[ok]
    return out


def designate_attributes(
    activations: list[np.ndarray],
    n_features: int,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Pick feature and target neurons from the hidden layers.

    n_features + 1 distinct (layer, neuron) pairs are drawn uniformly; the
    last is the raw target. All returned columns are standardized, with
    constant columns replaced by zeros.
    """
    h = activations[0].shape[1]
    total = len(activations) * h
    if total < n_features + 1:
        raise InsufficientNeuronsError(
            f"{total} hidden neurons cannot supply {n_features} features + target"
        )
    flat = rng.choice(total, size=n_features + 1, replace=False)
    cols = np.stack(
        [activations[int(i) // h][:, int(i) % h] for i in flat], axis=1
    )
    cols = _standardize_columns(cols)
    return cols[:, :n_features], cols[:, n_features]


def derive_task(raw_target: np.ndarray, task: "Task") -> np.ndarray:
    """Final target: standardized values (regression) or quantile-bin ids.

    Classification places sorted nodes into n_classes equal-count bins,
    breaking ties by node index; each class is non-empty whenever the
    target has at least n_classes distinct values.
    """
    raw_target = np.asarray(raw_target, dtype=np.float64)
    if task.is_classification:
        c = task.n_classes
        if len(np.unique(raw_target)) < c:
            raise DegenerateTargetError(
                f"target has fewer than {c} distinct values"
            )
        n = len(raw_target)
        order = np.argsort(raw_target, kind="stable")
        classes = np.empty(n, dtype=np.int64)
        classes[order] = (np.arange(n, dtype=np.int64) * c) // n
        return classes
    if raw_target.std() == 0:
        raise DegenerateTargetError("constant regression target")
    standardized = (raw_target - raw_target.mean()) / raw_target.std()
    return standardized.astype(np.float32)


@dataclass(frozen=True)
class AttributedGraphDataset:
    """Generated graph with node features, targets, and provenance."""

    graph: GraphStructure
    features: np.ndarray  # (n, n_features) float32
    target: np.ndarray  # float32 (regression) or int64 class ids
    task: "Task"
    prior: "PriorSample | None"
    seed: int

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def validate(self) -> None:
        n = self.graph.n_nodes
        if self.features.shape[0] != n or self.target.shape[0] != n:
            raise ValueError("feature/target row count mismatch")
        if not np.isfinite(self.features).all():
            raise ValueError("non-finite feature values")
        if self.task.is_classification:
            c = self.task.n_classes
            if self.target.min(initial=0) < 0 or self.target.max(initial=0) >= c:
                raise ValueError("class id outside [0, n_classes)")
            if len(np.unique(self.target)) < 2:
                raise ValueError("fewer than 2 classes present")
        else:
            if not np.isfinite(self.target).all():
                raise ValueError("non-finite regression target")
            t = self.target.astype(np.float64)
            if abs(t.mean()) > MOMENT_TOL or abs(t.var() - 1.0) > MOMENT_TOL:
                raise ValueError("regression target not standardized")


def generate_attributes(graph: GraphStructure, prior: "PriorSample") -> AttributedGraphDataset:
    """Full attribute pipeline with retry on overflow or degenerate target.

    Deterministic given (graph, prior); retries derive fresh streams from
    the prior seed and attempt index, up to 8 attempts.
    """
    last: Exception | None = None
    for attempt in range(8):
        try:
            return _generate_once(graph, prior, attempt)
        except (NumericOverflowError, DegenerateTargetError) as exc:
            last = exc
    raise AttributeGenerationError(
        f"attribute generation failed after 8 attempts: {last}"
    )


def _generate_once(
    graph: GraphStructure, prior: "PriorSample", attempt: int
) -> AttributedGraphDataset:
    params = prior.scm_params
    n = graph.n_nodes
    inputs = stream(prior.seed, "scm_inputs", attempt).standard_normal(
        (n, params.input_dim), dtype=np.float32
    )
    if params.use_lappe:
        pe = laplacian_pe(graph, params.lappe_k, stream(prior.seed, "lappe", attempt))
        inputs = np.concatenate([inputs, pe.values.astype(np.float32)], axis=1)
    scm = sample_scm(params, stream(prior.seed, "scm_weights", attempt))
    layers = propagate(scm, graph, inputs, stream(prior.seed, "scm_noise", attempt))
    features, raw_target = designate_attributes(
        layers, prior.n_features, stream(prior.seed, "designate", attempt)
    )
    target = derive_task(raw_target, prior.task)
    dataset = AttributedGraphDataset(
        graph=graph,
        features=features.astype(np.float32),
        target=target,
        task=prior.task,
        prior=prior,
        seed=prior.seed,
    )
    dataset.validate()
    return dataset
