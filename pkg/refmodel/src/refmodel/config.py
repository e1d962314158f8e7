"""Model and training configuration dataclasses."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ShapeError

MAX_SUPPORTED_CLASSES = 10


@dataclass(frozen=True)
class ModelConfig:
    """Architecture hyperparameters of the reference model.

    A block applies feature-level attention (within each node, across
    its tokens), sample-level attention under the in-context mask, and
    an adjacency-masked graph-adapter attention; every attention
    sublayer is followed by a feed-forward sublayer. use_adapters=False
    drops the adapter sublayers entirely (ablation runs).
    """

    d_model: int = 32
    n_heads: int = 2
    n_blocks: int = 2
    feature_attn_layers_per_block: int = 2
    ffn_expansion: int = 2
    max_classes: int = MAX_SUPPORTED_CLASSES
    dropout: float = 0.0
    use_adapters: bool = True

    def validate(self) -> None:
        if self.d_model < 1 or self.n_heads < 1 or self.n_blocks < 1:
            raise ShapeError("d_model, n_heads, n_blocks must be positive")
        if self.d_model % self.n_heads:
            raise ShapeError(
                f"d_model {self.d_model} not divisible by n_heads {self.n_heads}"
            )
        if not 1 <= self.max_classes <= MAX_SUPPORTED_CLASSES:
            raise ShapeError(
                f"max_classes must lie in [1, {MAX_SUPPORTED_CLASSES}]"
            )
        if self.feature_attn_layers_per_block < 0:
            raise ShapeError("feature_attn_layers_per_block must be >= 0")
        if self.ffn_expansion < 1:
            raise ShapeError("ffn_expansion must be >= 1")
        if not 0.0 <= self.dropout < 1.0:
            raise ShapeError("dropout must lie in [0, 1)")


@dataclass(frozen=True)
class TrainConfig:
    """Optimization schedule: Adam with linear warmup to a constant rate.

    warmup_steps defaults to the full-scale schedule; desk-scale runs
    override it to 500. mgm_coefficient weights the masked-edge loss
    term and stays at 0.1 unless deliberately overridden. max_nodes
    bounds accepted dataset sizes (larger containers are an error, not
    silently truncated).
    """

    learning_rate: float = 3e-4
    warmup_steps: int = 10_000
    total_steps: int = 2_000
    mgm_coefficient: float = 0.1
    datasets_per_step: int = 1
    max_nodes: int = 512

    def validate(self) -> None:
        if self.learning_rate <= 0:
            raise ShapeError("learning_rate must be positive")
        if self.warmup_steps < 1 or self.total_steps < 1:
            raise ShapeError("warmup_steps and total_steps must be >= 1")
        if self.mgm_coefficient < 0:
            raise ShapeError("mgm_coefficient must be >= 0")
        if self.datasets_per_step != 1:
            raise ShapeError("only datasets_per_step=1 is supported")
        if self.max_nodes < 2:
            raise ShapeError("max_nodes must be >= 2")
