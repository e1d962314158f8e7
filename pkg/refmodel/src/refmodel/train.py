"""Training harness: stream containers, one dataset per optimizer step."""

from __future__ import annotations

from dataclasses import asdict
from pathlib import Path

import torch

from .config import ModelConfig, TrainConfig
from .container_reader import DatasetRecord, list_containers, read_gpfn
from .errors import DataError
from .losses import joint_loss
from .model import RefModel


def load_training_data(
    data_dir: str | Path, train_cfg: TrainConfig, model_cfg: ModelConfig
) -> list[DatasetRecord]:
    """Read every container under data_dir, rejecting anything the
    harness cannot train on."""
    records = []
    for path in list_containers(data_dir):
        record = read_gpfn(path)
        if not record.is_classification:
            raise DataError(
                f"{path}: regression container; this harness trains on "
                "classification datasets only"
            )
        if record.n_nodes > train_cfg.max_nodes:
            raise DataError(
                f"{path}: {record.n_nodes} nodes exceeds the configured "
                f"cap of {train_cfg.max_nodes}"
            )
        if record.n_classes > model_cfg.max_classes:
            raise DataError(
                f"{path}: {record.n_classes} classes exceeds the model's "
                f"max_classes {model_cfg.max_classes}"
            )
        if not record.episodes:
            raise DataError(f"{path}: container holds no episodes")
        records.append(record)
    return records


def warmup_lr(base: float, step: int, warmup_steps: int) -> float:
    """Linear ramp over warmup_steps, constant afterwards (step is 0-based)."""
    return base * min(1.0, (step + 1) / warmup_steps)


def train_step(
    model: RefModel,
    optimizer: torch.optim.Optimizer,
    record: DatasetRecord,
    episode_index: int,
    mgm_coefficient: float,
) -> dict:
    episode = record.episodes[episode_index % len(record.episodes)]
    grid = model.embed(record.features, record.targets, episode.context_mask)
    logits, edge_scores = model.forward(grid, episode, record.graph)
    loss = joint_loss(
        logits[:, : record.n_classes],
        edge_scores,
        episode,
        record.targets,
        mgm_coefficient,
    )
    optimizer.zero_grad()
    loss.backward()
    optimizer.step()
    return {"loss": float(loss.detach())}


def train(
    data_dir: str | Path,
    train_cfg: TrainConfig,
    model_cfg: ModelConfig,
    seed: int,
    progress=None,
) -> dict:
    """Train from scratch over the containers in data_dir.

    Datasets are visited round-robin, one per step. Returns a checkpoint
    dict: configs, final weights, per-step loss records, and the seed.
    Deterministic for a fixed seed on a fixed device. `progress`, if
    given, is called with each loss record as it is produced.
    """
    train_cfg.validate()
    model_cfg.validate()
    records = load_training_data(data_dir, train_cfg, model_cfg)

    torch.manual_seed(seed)
    model = RefModel(model_cfg)
    optimizer = torch.optim.Adam(model.parameters(), lr=train_cfg.learning_rate)

    loss_records = []
    visits = [0] * len(records)
    for step in range(train_cfg.total_steps):
        lr = warmup_lr(train_cfg.learning_rate, step, train_cfg.warmup_steps)
        for group in optimizer.param_groups:
            group["lr"] = lr
        index = step % len(records)
        result = train_step(
            model, optimizer, records[index], visits[index], train_cfg.mgm_coefficient
        )
        visits[index] += 1
        entry = {"step": step, "loss": result["loss"], "lr": lr}
        loss_records.append(entry)
        if progress is not None:
            progress(entry)

    return {
        "model_config": asdict(model_cfg),
        "train_config": asdict(train_cfg),
        "state_dict": model.state_dict(),
        "loss_records": loss_records,
        "seed": int(seed),
    }


def model_from_checkpoint(checkpoint: dict) -> RefModel:
    config = ModelConfig(**checkpoint["model_config"])
    model = RefModel(config)
    model.load_state_dict(checkpoint["state_dict"])
    model.eval()
    return model
