"""Joint supervised + masked-edge objective."""

from __future__ import annotations

import torch
import torch.nn.functional as F

from .container_reader import EpisodeRecord
from .errors import ShapeError


def joint_loss(
    logits: torch.Tensor,
    edge_scores: torch.Tensor,
    episode: EpisodeRecord,
    labels,
    mgm_coefficient: float = 0.1,
) -> torch.Tensor:
    """Cross-entropy over query-node logits plus mgm_coefficient times
    binary cross-entropy over candidate-pair scores (positives are class
    1, negatives class 0; `edge_scores` is ordered positives first).

    With no candidate pairs, or a zero coefficient, the result is the
    supervised term alone.
    """
    query_labels = torch.as_tensor(labels, dtype=torch.long)[
        ~torch.as_tensor(episode.context_mask, dtype=torch.bool)
    ]
    if logits.shape[0] != query_labels.shape[0]:
        raise ShapeError(
            f"{logits.shape[0]} query logits for {query_labels.shape[0]} query nodes"
        )
    supervised = F.cross_entropy(logits, query_labels)
    n_candidates = len(episode.positives) + len(episode.negatives)
    if edge_scores.numel() != n_candidates:
        raise ShapeError(
            f"{edge_scores.numel()} edge scores for {n_candidates} candidates"
        )
    if mgm_coefficient == 0.0 or n_candidates == 0:
        return supervised
    pair_labels = torch.cat(
        [
            edge_scores.new_ones(len(episode.positives)),
            edge_scores.new_zeros(len(episode.negatives)),
        ]
    )
    mgm = F.binary_cross_entropy_with_logits(edge_scores, pair_labels)
    return supervised + mgm_coefficient * mgm
