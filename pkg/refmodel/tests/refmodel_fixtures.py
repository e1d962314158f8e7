"""Shared builders for the reference-model test suite.

Not a conftest (the generator suite already owns that module name):
test modules import what they need explicitly, including the fixture
functions. Two kinds of helpers live here: direct constructors for the
reader-side dataclasses (small handcrafted instances for unit tests)
and a thin wrapper around the generator package for producing real
container files (integration and training tests).
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from graphprior import PriorConfig, generate_container, write_container
from graphprior.rng import derive_seed
from refmodel import CsrGraph, DatasetRecord, EpisodeRecord


def csr_from_edges(n: int, edges) -> CsrGraph:
    """Symmetric CSR graph from an undirected edge list."""
    pairs = set()
    for u, v in edges:
        if u == v:
            raise ValueError(f"self loop {u}")
        pairs.add((int(u), int(v)))
        pairs.add((int(v), int(u)))
    if pairs:
        arr = np.array(sorted(pairs), dtype=np.int64)
        counts = np.bincount(arr[:, 0], minlength=n)
        indices = arr[:, 1]
    else:
        counts = np.zeros(n, dtype=np.int64)
        indices = np.zeros(0, dtype=np.int64)
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    return CsrGraph(n_nodes=n, offsets=offsets, indices=indices)


def make_episode(
    n: int,
    context_nodes,
    positives=(),
    negatives=(),
    pruned_edges=(),
) -> EpisodeRecord:
    mask = np.zeros(n, dtype=bool)
    mask[list(context_nodes)] = True
    return EpisodeRecord(
        context_mask=mask,
        positives=np.array(positives, dtype=np.int64).reshape(-1, 2),
        negatives=np.array(negatives, dtype=np.int64).reshape(-1, 2),
        pruned=csr_from_edges(n, pruned_edges),
    )


def make_record(
    features: np.ndarray,
    targets: np.ndarray,
    edges,
    episodes,
    n_classes: int,
    lappe_k: int = 0,
    metadata: dict | None = None,
) -> DatasetRecord:
    features = np.asarray(features, dtype=np.float32)
    n = features.shape[0]
    return DatasetRecord(
        n_nodes=n,
        n_features=features.shape[1],
        n_classes=n_classes,
        lappe_k=lappe_k,
        graph=csr_from_edges(n, edges),
        features=features,
        targets=np.asarray(targets),
        episodes=tuple(episodes),
        metadata=metadata or {},
    )


def classification_prior(**overrides) -> PriorConfig:
    """Small fully graph-coupled classification prior for harness tests."""
    base = dict(
        node_count_range=(60, 140),
        mixing_grid=(1.0,),
        lappe_probability=0.0,
        regression_probability=0.0,
        class_count_range=(2, 2),
        feature_count_range=(4, 8),
        context_fraction_range=(0.5, 0.7),
    )
    base.update(overrides)
    return PriorConfig(**base)


def write_containers(
    directory: Path,
    config: PriorConfig,
    base_seed: int,
    count: int,
    n_episodes: int = 1,
) -> list[Path]:
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for i in range(count):
        seed = derive_seed(base_seed, i)
        container = generate_container(config, seed, n_episodes=n_episodes)
        path = directory / f"{seed}.gpfn"
        write_container(container, path)
        paths.append(path)
    return paths


@pytest.fixture(scope="session")
def tiny_dataset_dir(tmp_path_factory) -> Path:
    """Twenty small classification containers for training-loop tests."""
    directory = tmp_path_factory.mktemp("tiny_containers")
    write_containers(
        directory,
        classification_prior(node_count_range=(40, 80)),
        base_seed=90210,
        count=20,
    )
    return directory
