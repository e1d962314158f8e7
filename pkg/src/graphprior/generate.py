"""End-to-end dataset generation: prior draw, structure, attributes, episodes."""

from __future__ import annotations

from .container import DatasetContainer, make_container
from .episode import Episode, build_episode
from .graphs import GraphStructure
from .prior_config import PriorConfig, PriorSample, sample_prior
from .rng import stream
from .scm import AttributedGraphDataset, generate_attributes
from .structure import generate_structure


def generate_graph(config: PriorConfig, seed: int) -> tuple[GraphStructure, PriorSample]:
    """Structure-only pipeline: prior draw plus graph generation."""
    prior = sample_prior(config, seed)
    graph, _ = generate_structure(prior)
    return graph, prior


def generate_dataset(config: PriorConfig, seed: int) -> AttributedGraphDataset:
    """One fully attributed dataset, deterministic in (config, seed)."""
    graph, prior = generate_graph(config, seed)
    return generate_attributes(graph, prior)


def build_episodes(dataset: AttributedGraphDataset, count: int) -> list[Episode]:
    """Independent episodes drawn from per-index streams of the dataset seed."""
    return [
        build_episode(dataset, stream(dataset.seed, "episode", index))
        for index in range(count)
    ]


def generate_container(
    config: PriorConfig, seed: int, n_episodes: int = 1
) -> DatasetContainer:
    dataset = generate_dataset(config, seed)
    return make_container(dataset, build_episodes(dataset, n_episodes))
