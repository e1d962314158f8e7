import dataclasses
import json
import struct

import numpy as np
import pytest

from graphprior import (
    AttributedGraphDataset,
    BadMagicError,
    CorruptSectionError,
    Episode,
    InvariantViolationError,
    Task,
    UnsupportedVersionError,
    build_episode,
    generate_container,
    generate_dataset,
    load_config,
    read_container,
    read_dataset,
    stream,
    write_dataset,
)
from graphprior.container import (
    HEADER_SIZE,
    container_bytes,
    expected_file_size,
    make_container,
)

from conftest import random_graph


def _tiny(seed: int, **overrides):
    cfg = dataclasses.replace(
        load_config(), node_count_range=(40, 120), **overrides
    )
    return generate_dataset(cfg, seed)


def _dataset_with_episode(seed: int, **overrides):
    ds = _tiny(seed, **overrides)
    ep = build_episode(ds, stream(ds.seed, "episode"))
    return ds, [ep]


def test_round_trip_regression(tmp_path):
    ds, eps = _dataset_with_episode(3, regression_probability=1.0)
    path = tmp_path / "r.gpfn"
    write_dataset(ds, eps, path)
    back, back_eps = read_dataset(path)
    np.testing.assert_array_equal(back.graph.offsets, ds.graph.offsets)
    np.testing.assert_array_equal(back.graph.indices, ds.graph.indices)
    assert back.features.tobytes() == ds.features.tobytes()
    assert back.target.tobytes() == ds.target.astype(np.float32).tobytes()
    assert back.task == Task(kind="regression")
    assert back.seed == ds.seed
    assert len(back_eps) == 1
    np.testing.assert_array_equal(back_eps[0].context_mask, eps[0].context_mask)
    np.testing.assert_array_equal(back_eps[0].mgm_positives, eps[0].mgm_positives)
    np.testing.assert_array_equal(back_eps[0].mgm_negatives, eps[0].mgm_negatives)
    np.testing.assert_array_equal(
        back_eps[0].pruned_graph.indices, eps[0].pruned_graph.indices
    )


def test_round_trip_classification(tmp_path):
    ds, eps = _dataset_with_episode(8, regression_probability=0.0)
    assert ds.task.is_classification
    path = tmp_path / "c.gpfn"
    write_dataset(ds, eps, path)
    back, _ = read_dataset(path)
    assert back.task.n_classes == ds.task.n_classes
    np.testing.assert_array_equal(back.target, ds.target)


def test_reserialization_is_byte_exact(tmp_path):
    for seed in (1, 2, 9):
        ds, eps = _dataset_with_episode(seed)
        path = tmp_path / f"{seed}.gpfn"
        write_dataset(ds, eps, path)
        original = path.read_bytes()
        assert container_bytes(read_container(path)) == original


def test_zero_episodes(tmp_path):
    ds = _tiny(4)
    path = tmp_path / "z.gpfn"
    write_dataset(ds, [], path)
    assert path.read_bytes()[32:34] == b"\x00\x00"  # episode_count field
    _, eps = read_dataset(path)
    assert eps == []


def test_file_size_matches_layout_arithmetic(tmp_path):
    ds, eps = _dataset_with_episode(5)
    path = tmp_path / "s.gpfn"
    write_dataset(ds, eps, path)
    container = make_container(ds, eps)
    meta_len = len(
        json.dumps(container.metadata, sort_keys=True, separators=(",", ":")).encode()
    )
    expected = expected_file_size(
        ds.graph.n_nodes,
        ds.graph.n_arcs,
        ds.n_features,
        ds.task.is_classification,
        [(ep.n_positives, ep.pruned_graph.n_arcs) for ep in eps],
        meta_len,
    )
    assert path.stat().st_size == expected


def test_metadata_contents(tmp_path):
    ds, eps = _dataset_with_episode(6)
    path = tmp_path / "m.gpfn"
    write_dataset(ds, eps, path)
    meta = read_container(path).metadata
    assert meta["seed"] == ds.seed
    assert meta["format"] == "gpfn/1"
    assert meta["prior"]["n_total"] == ds.graph.n_nodes
    assert meta["prior"]["task"]["kind"] == ds.task.kind


def test_lappe_k_header_field(tmp_path):
    cfg = dataclasses.replace(
        load_config(), node_count_range=(40, 80), lappe_probability=1.0
    )
    container = generate_container(cfg, 11, n_episodes=0)
    path = tmp_path / "k.gpfn"
    write_dataset(container.dataset, [], path, metadata=container.metadata)
    # the convenience writer recomputes lappe_k from the prior
    assert read_container(path).lappe_k == container.dataset.prior.lappe_k


def test_bad_magic(tmp_path):
    ds = _tiny(7)
    path = tmp_path / "x.gpfn"
    write_dataset(ds, [], path)
    data = bytearray(path.read_bytes())
    data[:4] = b"NOPE"
    path.write_bytes(bytes(data))
    with pytest.raises(BadMagicError):
        read_container(path)


def test_unsupported_version(tmp_path):
    ds = _tiny(7)
    path = tmp_path / "x.gpfn"
    write_dataset(ds, [], path)
    data = bytearray(path.read_bytes())
    data[4:6] = struct.pack("<H", 2)
    path.write_bytes(bytes(data))
    with pytest.raises(UnsupportedVersionError):
        read_container(path)


def test_unknown_flag_bits_rejected(tmp_path):
    ds = _tiny(7)
    path = tmp_path / "x.gpfn"
    write_dataset(ds, [], path)
    data = bytearray(path.read_bytes())
    flags = struct.unpack("<H", data[6:8])[0] | 0x0004
    data[6:8] = struct.pack("<H", flags)
    path.write_bytes(bytes(data))
    with pytest.raises(CorruptSectionError) as err:
        read_container(path)
    assert err.value.section == "header"


def test_truncation_names_each_section(tmp_path):
    ds, eps = _dataset_with_episode(9)
    path = tmp_path / "t.gpfn"
    write_dataset(ds, eps, path)
    data = path.read_bytes()
    n = ds.graph.n_nodes
    offsets_end = HEADER_SIZE + (n + 1) * 8
    indices_end = offsets_end + ds.graph.n_arcs * 4
    features_end = indices_end + n * ds.n_features * 4
    cut_points = {
        HEADER_SIZE - 10: "header",
        offsets_end - 4: "graph",
        indices_end - 2: "graph",
        features_end - 8: "features",
        features_end + 1: "targets",
        len(data) - 3: "metadata",
    }
    for cut, section in cut_points.items():
        path.write_bytes(data[:cut])
        with pytest.raises(CorruptSectionError) as err:
            read_container(path)
        assert err.value.section.startswith(section), (cut, err.value.section)


def test_truncated_episode_block(tmp_path):
    ds, eps = _dataset_with_episode(10)
    path = tmp_path / "e.gpfn"
    write_dataset(ds, eps, path)
    data = path.read_bytes()
    n = ds.graph.n_nodes
    fixed = (
        HEADER_SIZE
        + (n + 1) * 8
        + ds.graph.n_arcs * 4
        + n * ds.n_features * 4
        + n * (2 if ds.task.is_classification else 4)
    )
    path.write_bytes(data[: fixed + 3])  # inside the context bitmap
    with pytest.raises(CorruptSectionError) as err:
        read_container(path)
    assert err.value.section.startswith("episode")


def test_trailing_garbage_rejected(tmp_path):
    ds = _tiny(12)
    path = tmp_path / "g.gpfn"
    write_dataset(ds, [], path)
    path.write_bytes(path.read_bytes() + b"junk")
    with pytest.raises(CorruptSectionError):
        read_container(path)


def test_corrupt_metadata_json(tmp_path):
    ds = _tiny(13)
    path = tmp_path / "j.gpfn"
    write_dataset(ds, [], path)
    data = bytearray(path.read_bytes())
    data[-2] = 0xFF  # break the JSON payload without changing its length
    path.write_bytes(bytes(data))
    with pytest.raises(CorruptSectionError) as err:
        read_container(path)
    assert err.value.section == "metadata"


def test_tampered_adjacency_rejected(tmp_path):
    ds = _tiny(14)
    path = tmp_path / "a.gpfn"
    write_dataset(ds, [], path)
    data = bytearray(path.read_bytes())
    first_index_at = HEADER_SIZE + (ds.graph.n_nodes + 1) * 8
    original = struct.unpack_from("<I", data, first_index_at)[0]
    struct.pack_into("<I", data, first_index_at, original + 1)
    path.write_bytes(bytes(data))
    with pytest.raises(InvariantViolationError):
        read_container(path)


def test_invalid_episode_rejected(tmp_path):
    # a "positive" that is not an edge of the graph must fail validation
    ds = _tiny(15)
    g = ds.graph
    ep = build_episode(ds, stream(ds.seed, "episode"))
    u, v = 0, 1
    while g.has_edges(np.array([u]), np.array([v]))[0]:
        v += 1
    bad_pos = ep.mgm_positives.copy()
    if len(bad_pos) == 0:
        pytest.skip("draw produced no positives")
    bad_pos[0] = (u, v)
    bad = dataclasses.replace(ep, mgm_positives=bad_pos)
    path = tmp_path / "b.gpfn"
    write_dataset(ds, [bad], path)
    with pytest.raises(InvariantViolationError):
        read_container(path)


def test_nonzero_bitmap_padding_rejected(tmp_path):
    ds = _tiny(16)
    n = ds.graph.n_nodes
    if n % 8 == 0:
        pytest.skip("node count is a multiple of 8; no padding bits")
    ep = build_episode(ds, stream(ds.seed, "episode"))
    path = tmp_path / "p.gpfn"
    write_dataset(ds, [ep], path)
    data = bytearray(path.read_bytes())
    bitmap_at = (
        HEADER_SIZE
        + (n + 1) * 8
        + ds.graph.n_arcs * 4
        + n * ds.n_features * 4
        + n * (2 if ds.task.is_classification else 4)
    )
    data[bitmap_at + (n + 7) // 8 - 1] |= 0x80  # set a padding bit
    path.write_bytes(bytes(data))
    with pytest.raises(CorruptSectionError):
        read_container(path)


def test_handcrafted_dataset_round_trip(tmp_path, rng):
    g = random_graph(25, 0.2, rng)
    n = g.n_nodes
    target = rng.standard_normal(n)
    target = ((target - target.mean()) / target.std()).astype(np.float32)
    ds = AttributedGraphDataset(
        graph=g,
        features=rng.standard_normal((n, 3)).astype(np.float32),
        target=target,
        task=Task(kind="regression"),
        prior=None,
        seed=123,
    )
    path = tmp_path / "h.gpfn"
    write_dataset(ds, [], path, metadata={"seed": 123, "note": "hand-built"})
    back, _ = read_dataset(path)
    assert back.features.tobytes() == ds.features.tobytes()
    assert read_container(path).metadata["note"] == "hand-built"
