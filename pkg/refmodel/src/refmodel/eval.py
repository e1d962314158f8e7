"""In-context evaluation over held-out classification containers."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch
from sklearn.metrics import average_precision_score

from .container_reader import DatasetRecord, EpisodeRecord, read_gpfn
from .errors import DataError
from .model import RefModel


def predict_queries(
    model: RefModel, record: DatasetRecord, episode: EpisodeRecord
) -> tuple[np.ndarray, np.ndarray]:
    """Class probabilities and true labels for the episode's query nodes."""
    if not record.is_classification:
        raise DataError(
            "regression container; this harness evaluates classification only"
        )
    with torch.no_grad():
        grid = model.embed(record.features, record.targets, episode.context_mask)
        logits, _ = model.forward(grid, episode, record.graph)
        probs = torch.softmax(logits[:, : record.n_classes], dim=-1)
    labels = record.targets[~episode.context_mask]
    return probs.numpy(), labels


def majority_baseline(record: DatasetRecord, episode: EpisodeRecord) -> float:
    """Query accuracy of always predicting the most common context label."""
    context_labels = record.targets[episode.context_mask]
    majority = int(np.bincount(context_labels, minlength=record.n_classes).argmax())
    query_labels = record.targets[~episode.context_mask]
    return float((query_labels == majority).mean())


def _evaluate_one(model: RefModel, record: DatasetRecord, path) -> dict:
    episode = record.episodes[0]
    probs, labels = predict_queries(model, record, episode)
    accuracy = float((probs.argmax(axis=1) == labels).mean())
    if record.n_classes == 2:
        metric, value = "average_precision", float(
            average_precision_score(labels, probs[:, 1])
        )
    else:
        metric, value = "accuracy", accuracy
    return {
        "file": str(path),
        "metric": metric,
        "value": value,
        "accuracy": accuracy,
        "majority_accuracy": majority_baseline(record, episode),
        "n_query": int(len(labels)),
        "n_classes": int(record.n_classes),
    }


def evaluate_icl(model: RefModel, paths: list[str | Path]) -> dict:
    """One row per dataset plus a mean/std aggregate of the headline
    metric (average precision for binary tasks, accuracy otherwise)."""
    rows = []
    for path in paths:
        record = read_gpfn(path)
        if not record.episodes:
            raise DataError(f"{path}: container holds no episodes")
        rows.append(_evaluate_one(model, record, path))
    values = np.array([row["value"] for row in rows], dtype=np.float64)
    return {
        "datasets": rows,
        "aggregate": {
            "mean": float(values.mean()),
            "std": float(values.std(ddof=1)) if len(values) > 1 else 0.0,
            "count": len(rows),
        },
    }
