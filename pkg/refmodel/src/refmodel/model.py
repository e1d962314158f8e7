"""PFN-style transformer over per-node token grids with graph adapters.

Each node contributes one token per feature plus one target token. A
block applies, in order: feature-level attention within each node (across
its tokens), sample-level attention across nodes under the in-context
mask (context nodes attend to each other, query nodes attend to context
nodes only), and a graph-adapter attention across nodes where two nodes
attend if and only if an edge of the episode's pruned graph connects
them. Every attention sublayer is followed by a feed-forward sublayer;
all sublayers are pre-norm residual, so the residual stream passes
through unchanged wherever a sublayer's output projection is zero.

The classification head reads the last-layer target token of each query
node; the masked-edge head scores candidate pairs from the concatenated
last-layer target tokens of both endpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from .config import ModelConfig
from .container_reader import CsrGraph, EpisodeRecord
from .errors import DataError, ShapeError


@dataclass
class TokenGrid:
    """Activations indexed by (node, token, channel); the target token
    is the last one."""

    activations: torch.Tensor

    @property
    def n_nodes(self) -> int:
        return self.activations.shape[0]

    @property
    def n_tokens(self) -> int:
        return self.activations.shape[1]


def pfn_mask(context_mask: torch.Tensor) -> torch.Tensor:
    """(n, n) boolean mask: entry (i, j) allows node i to attend node j.

    Everyone attends to context nodes (including context self-attention);
    nobody attends to query nodes, so no information flows out of them.
    """
    n = context_mask.shape[0]
    return context_mask.view(1, n).expand(n, n)


def adjacency_mask(graph: CsrGraph, device=None) -> torch.Tensor:
    """(n, n) boolean mask allowing attention exactly along graph edges."""
    return torch.from_numpy(graph.dense_adjacency()).to(device=device)


class MaskedAttention(nn.Module):
    """Multi-head scaled dot-product attention with a boolean mask.

    Masked positions receive exactly zero weight (masking happens before
    normalization); rows with no permitted key produce a zero update
    instead of NaN.
    """

    def __init__(self, d_model: int, n_heads: int, dropout: float):
        super().__init__()
        self.n_heads = n_heads
        self.head_dim = d_model // n_heads
        self.qkv = nn.Linear(d_model, 3 * d_model)
        self.out = nn.Linear(d_model, d_model)
        self.drop = nn.Dropout(dropout)

    def _project(self, x: torch.Tensor):
        batch, length, _ = x.shape
        qkv = self.qkv(x).view(batch, length, 3, self.n_heads, self.head_dim)
        q, k, v = qkv.unbind(dim=2)
        return (t.transpose(1, 2) for t in (q, k, v))  # (B, H, L, dh)

    @staticmethod
    def _weights(q: torch.Tensor, k: torch.Tensor, mask) -> torch.Tensor:
        scores = q @ k.transpose(-2, -1) / math.sqrt(q.shape[-1])
        if mask is not None:
            scores = scores.masked_fill(~mask, float("-inf"))
        weights = torch.softmax(scores, dim=-1)
        # fully masked rows turn into NaN; they must contribute nothing
        return torch.nan_to_num(weights, nan=0.0)

    def attention_weights(self, x: torch.Tensor, mask=None) -> torch.Tensor:
        """Post-softmax weights (B, H, L, L); for inspection and tests."""
        q, k, _ = self._project(x)
        return self._weights(q, k, mask)

    def forward(self, x: torch.Tensor, mask=None) -> torch.Tensor:
        q, k, v = self._project(x)
        weights = self._weights(q, k, mask)
        mixed = (weights @ v).transpose(1, 2).reshape(x.shape)
        update = self.out(mixed)
        if mask is not None:
            # the output projection bias must not leak into keyless rows
            alive = mask.any(dim=-1)
            shape = (1, -1, 1) if alive.dim() == 1 else (*alive.shape, 1)
            update = update * alive.view(shape)
        return self.drop(update)


class FeedForward(nn.Module):
    def __init__(self, d_model: int, expansion: int, dropout: float):
        super().__init__()
        self.lift = nn.Linear(d_model, expansion * d_model)
        self.act = nn.GELU()
        self.proj = nn.Linear(expansion * d_model, d_model)
        self.drop = nn.Dropout(dropout)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.drop(self.proj(self.act(self.lift(x))))


class Residual(nn.Module):
    """Pre-norm residual wrapper: x + inner(norm(x), ...)."""

    def __init__(self, d_model: int, inner: nn.Module):
        super().__init__()
        self.norm = nn.LayerNorm(d_model)
        self.inner = inner

    def forward(self, x: torch.Tensor, *args) -> torch.Tensor:
        return x + self.inner(self.norm(x), *args)


class Block(nn.Module):
    """One backbone block; see the module docstring for the layout."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        d, h, e, p = (
            config.d_model,
            config.n_heads,
            config.ffn_expansion,
            config.dropout,
        )

        def attn():
            return Residual(d, MaskedAttention(d, h, p))

        def ffn():
            return Residual(d, FeedForward(d, e, p))

        self.feature_layers = nn.ModuleList()
        for _ in range(config.feature_attn_layers_per_block):
            self.feature_layers.append(nn.ModuleList([attn(), ffn()]))
        self.sample_attn = attn()
        self.sample_ffn = ffn()
        self.use_adapters = config.use_adapters
        if config.use_adapters:
            self.adapter_attn = attn()
            self.adapter_ffn = ffn()

    def forward(
        self,
        x: torch.Tensor,
        sample_mask: torch.Tensor,
        adapter_mask: torch.Tensor | None,
    ) -> torch.Tensor:
        for attention, feed_forward in self.feature_layers:
            x = attention(x)  # (nodes, tokens, d): mix tokens within a node
            x = feed_forward(x)
        x = x.transpose(0, 1)  # (tokens, nodes, d): mix nodes per token
        x = self.sample_attn(x, sample_mask)
        x = self.sample_ffn(x)
        if self.use_adapters:
            x = self.adapter_attn(x, adapter_mask)
            x = self.adapter_ffn(x)
        return x.transpose(0, 1)


class RefModel(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        config.validate()
        self.config = config
        d = config.d_model
        self.feature_embed = nn.Linear(1, d)
        self.label_embed = nn.Embedding(config.max_classes, d)
        self.missing_label = nn.Parameter(torch.randn(d) * 0.02)
        self.blocks = nn.ModuleList(Block(config) for _ in range(config.n_blocks))
        self.class_head = nn.Linear(d, config.max_classes)
        self.mgm_head = nn.Sequential(
            nn.Linear(2 * d, d), nn.GELU(), nn.Linear(d, 1)
        )

    @property
    def _dtype(self) -> torch.dtype:
        return self.feature_embed.weight.dtype

    def embed(self, features, labels, context_mask) -> TokenGrid:
        """Build the token grid for one dataset.

        `labels` is read for context nodes only; query target tokens are
        always the learned missing-label embedding, so query labels
        cannot influence the forward pass by construction.
        """
        if isinstance(features, torch.Tensor):
            # keep autograd intact so loss gradients w.r.t. inputs exist
            feats = features.to(self._dtype)
        else:
            feats = torch.as_tensor(np.asarray(features), dtype=self._dtype)
        if feats.dim() != 2:
            raise ShapeError("features must be 2-d (nodes x features)")
        ctx = torch.as_tensor(np.asarray(context_mask, dtype=bool))
        n = feats.shape[0]
        if ctx.shape[0] != n:
            raise ShapeError("context mask length does not match node count")
        tokens = self.feature_embed(feats.unsqueeze(-1))  # (n, nf, d)
        target = self.missing_label.to(self._dtype).expand(n, -1).clone()
        if ctx.any():
            context_labels = torch.as_tensor(
                np.asarray(labels), dtype=torch.long
            )[ctx]
            if context_labels.min() < 0 or (
                context_labels.max() >= self.config.max_classes
            ):
                raise DataError(
                    f"label outside [0, {self.config.max_classes}) in context"
                )
            target[ctx] = self.label_embed(context_labels)
        return TokenGrid(torch.cat([tokens, target.unsqueeze(1)], dim=1))

    def encode(self, grid: TokenGrid, episode: EpisodeRecord) -> torch.Tensor:
        """Run all blocks; returns the (nodes, tokens, d) residual stream."""
        n = grid.n_nodes
        if len(episode.context_mask) != n or episode.pruned.n_nodes != n:
            raise ShapeError("episode does not match grid node count")
        ctx = torch.as_tensor(episode.context_mask, dtype=torch.bool)
        sample_mask = pfn_mask(ctx)
        adapter_mask = None
        if self.config.use_adapters:
            adapter_mask = adjacency_mask(episode.pruned)
        x = grid.activations
        for block in self.blocks:
            x = block(x, sample_mask, adapter_mask)
        return x

    def forward(self, grid: TokenGrid, episode: EpisodeRecord, graph=None):
        """Class logits for query nodes and scores for the episode's
        candidate pairs (positives first, then negatives)."""
        if graph is not None and graph.n_nodes != grid.n_nodes:
            raise ShapeError("graph does not match grid node count")
        hidden = self.encode(grid, episode)
        target_tokens = hidden[:, -1, :]
        ctx = torch.as_tensor(episode.context_mask, dtype=torch.bool)
        logits = self.class_head(target_tokens[~ctx])
        pairs = np.concatenate([episode.positives, episode.negatives], axis=0)
        if len(pairs):
            idx = torch.as_tensor(pairs, dtype=torch.long)
            joined = torch.cat(
                [target_tokens[idx[:, 0]], target_tokens[idx[:, 1]]], dim=-1
            )
            scores = self.mgm_head(joined).squeeze(-1)
        else:
            scores = target_tokens.new_zeros(0)
        return logits, scores
