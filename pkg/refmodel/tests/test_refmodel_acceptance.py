"""Release gate for the reference model.

Three criteria: exact mask soundness, analytic-vs-numeric gradients,
and end-to-end learnability of graph-coupled classification priors with
the measured margins printed. The learnability run trains two full
models (with and without graph adapters) for 2,000 steps each and takes
a few minutes on a desktop CPU.
"""

from __future__ import annotations

import numpy as np
import pytest
import torch

from refmodel import (
    ModelConfig,
    RefModel,
    TrainConfig,
    evaluate_icl,
    joint_loss,
    model_from_checkpoint,
    train,
)

from refmodel_fixtures import (
    classification_prior,
    csr_from_edges,
    make_episode,
    write_containers,
)


def _query_logits(model, features, labels, episode, graph):
    grid = model.embed(features, labels, episode.context_mask)
    with torch.no_grad():
        logits, _ = model(grid, episode, graph)
    return logits


def _random_instance(n, nf, n_context, seed, p=0.25):
    rng = np.random.default_rng(seed)
    features = rng.normal(size=(n, nf)).astype(np.float32)
    labels = rng.integers(0, 2, size=n)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(len(iu)) < p
    edges = list(zip(iu[keep].tolist(), ju[keep].tolist()))
    episode = make_episode(n, range(n_context), pruned_edges=edges)
    return features, labels, edges, episode


def test_mask_soundness_is_exact():
    """Criterion: PFN masking and adapter locality hold with zero
    tolerance on 20-node graphs.

    Adapters off: no query's features or labels can reach another
    query's logits. One block with adapters: query u reaches query v
    exactly when u = v or they are adjacent in the pruned graph.
    """
    n, n_context = 20, 10

    torch.manual_seed(101)
    pfn_model = RefModel(ModelConfig(d_model=32, n_heads=2, n_blocks=2, use_adapters=False))
    pfn_model.eval()
    features, labels, edges, episode = _random_instance(n, 4, n_context, seed=55)
    graph = csr_from_edges(n, edges)
    base = _query_logits(pfn_model, features, labels, episode, graph)
    queries = np.flatnonzero(~episode.context_mask)

    pfn_checks = 0
    for position, node in enumerate(queries):
        perturbed = features.copy()
        perturbed[node] += 2.0
        logits = _query_logits(pfn_model, perturbed, labels, episode, graph)
        others = np.delete(np.arange(len(queries)), position)
        assert torch.equal(logits[others], base[others])
        pfn_checks += len(others)

    scrambled = labels.copy()
    scrambled[~episode.context_mask] = 1 - scrambled[~episode.context_mask]
    assert torch.equal(
        _query_logits(pfn_model, features, scrambled, episode, graph), base
    )

    torch.manual_seed(202)
    adapter_model = RefModel(ModelConfig(d_model=32, n_heads=2, n_blocks=1))
    adapter_model.eval()
    features, labels, edges, episode = _random_instance(n, 4, n_context, seed=56)
    graph = csr_from_edges(n, edges)
    adjacency = episode.pruned.dense_adjacency()
    base = _query_logits(adapter_model, features, labels, episode, graph)
    queries = np.flatnonzero(~episode.context_mask)

    locality_checks = 0
    for i, u in enumerate(queries):
        perturbed = features.copy()
        perturbed[u] += 2.0
        logits = _query_logits(adapter_model, perturbed, labels, episode, graph)
        for j, v in enumerate(queries):
            reachable = u == v or adjacency[u, v]
            assert (not torch.equal(logits[j], base[j])) == bool(reachable)
            locality_checks += 1

    print(
        f"\nmask soundness: {pfn_checks} PFN and {locality_checks} locality "
        "checks exact (zero tolerance)"
    )


def test_gradients_match_finite_differences():
    """Criterion: joint-loss gradients on a 4-node toy instance match
    central finite differences within 1e-3 relative error."""
    torch.manual_seed(77)
    model = RefModel(ModelConfig(d_model=8, n_heads=2, n_blocks=1)).double()
    model.eval()

    n = 4
    edges = [(0, 1), (1, 2), (2, 3), (0, 2)]
    graph = csr_from_edges(n, edges)
    episode = make_episode(
        n, [0, 1], positives=[(0, 1)], negatives=[(1, 3)],
        pruned_edges=[(1, 2), (2, 3), (0, 2)],
    )
    labels = np.array([0, 1, 1, 0])
    base_features = torch.randn(n, 2, dtype=torch.float64)

    def loss_at(features: torch.Tensor) -> torch.Tensor:
        grid = model.embed(features, labels, episode.context_mask)
        logits, scores = model(grid, episode, graph)
        return joint_loss(logits[:, :2], scores, episode, labels, 0.1)

    features = base_features.clone().requires_grad_(True)
    loss = loss_at(features)
    loss.backward()
    analytic_input = features.grad.clone()

    def relative_error(analytic: float, numeric: float) -> float:
        scale = max(abs(analytic), abs(numeric))
        if scale < 1e-10:
            return 0.0
        return abs(analytic - numeric) / scale

    h = 1e-5
    worst = 0.0
    for i in range(n):
        for j in range(base_features.shape[1]):
            bumped = base_features.clone()
            bumped[i, j] += h
            up = loss_at(bumped).item()
            bumped[i, j] -= 2 * h
            down = loss_at(bumped).item()
            numeric = (up - down) / (2 * h)
            worst = max(worst, relative_error(analytic_input[i, j].item(), numeric))

    # a sample of parameter coordinates, same oracle
    model.zero_grad()
    loss_at(base_features).backward()
    rng = np.random.default_rng(4)
    checked = 0
    for name, parameter in model.named_parameters():
        flat = parameter.detach().view(-1)
        grads = parameter.grad.view(-1)
        for index in rng.choice(len(flat), size=min(3, len(flat)), replace=False):
            original = flat[index].item()
            with torch.no_grad():
                flat[index] = original + h
            up = loss_at(base_features).item()
            with torch.no_grad():
                flat[index] = original - h
            down = loss_at(base_features).item()
            with torch.no_grad():
                flat[index] = original
            numeric = (up - down) / (2 * h)
            worst = max(worst, relative_error(grads[index].item(), numeric))
            checked += 1

    assert worst <= 1e-3, f"worst relative gradient error {worst:.2e}"
    print(
        f"\ngradient check: worst relative error {worst:.2e} over "
        f"{n * 2} input and {checked} parameter coordinates (need <= 1e-3)"
    )


@pytest.fixture(scope="module")
def learnability_data(tmp_path_factory):
    """Graph-coupled binary classification: every hidden neuron
    aggregates over neighborhoods (mixing probability 1), so the labels
    depend on the graph, not just the feature table."""
    prior = classification_prior(
        node_count_range=(80, 200), feature_count_range=(3, 6)
    )
    root = tmp_path_factory.mktemp("learnability")
    write_containers(root / "train", prior, 2026001, count=60)
    heldout = write_containers(root / "heldout", prior, 2026777, count=20)
    return root / "train", heldout


def test_learnability_beats_both_baselines(learnability_data):
    """Criterion: after 2,000 steps the full model's held-out in-context
    accuracy exceeds the context-majority baseline and the
    adapter-ablated model by at least 5 percentage points each,
    averaged over 20 held-out datasets."""
    train_dir, heldout = learnability_data
    train_cfg = TrainConfig(warmup_steps=500, total_steps=2000)

    accuracies = {}
    for name, use_adapters in [("full", True), ("ablated", False)]:
        checkpoint = train(
            train_dir,
            train_cfg,
            ModelConfig(d_model=32, n_heads=2, n_blocks=2, use_adapters=use_adapters),
            seed=2468,
        )
        report = evaluate_icl(model_from_checkpoint(checkpoint), heldout)
        rows = report["datasets"]
        accuracies[name] = float(np.mean([row["accuracy"] for row in rows]))
        if name == "full":
            majority = float(np.mean([row["majority_accuracy"] for row in rows]))

    margin_majority = accuracies["full"] - majority
    margin_ablated = accuracies["full"] - accuracies["ablated"]
    print(
        f"\nlearnability: full {accuracies['full']:.4f}, "
        f"majority {majority:.4f}, ablated {accuracies['ablated']:.4f}; "
        f"margins {margin_majority * 100:+.1f}pp vs majority, "
        f"{margin_ablated * 100:+.1f}pp vs ablated (need >= +5.0pp both)"
    )
    assert margin_majority >= 0.05
    assert margin_ablated >= 0.05
