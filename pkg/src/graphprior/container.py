"""Binary container for attributed-graph datasets (.gpfn files).

Layout (all integers little-endian), normative copy in docs/format.md:

    header (40 bytes):
        magic          4 bytes  ASCII "GPFN"
        version        u16      = 1
        flags          u16      bit 0 = classification task
        n_nodes        u64
        arc_count      u64      directed arcs (2x undirected edges)
        n_features     u32
        n_classes      u16      0 for regression
        lappe_k        u16      0 when no positional encodings were used
        episode_count  u16
        reserved       6 bytes  zero
    offsets   (n_nodes+1) x u64
    indices   arc_count x u32
    features  n_nodes x n_features x f32, row-major
    targets   n_nodes x f32 (regression) or n_nodes x u16 (classification)
    episodes, repeated episode_count times:
        context bitmap   ceil(n_nodes/8) bytes, LSB-first
        positive_count   u32
        positives        positive_count x 2 x u32
        negatives        positive_count x 2 x u32
        pruned_arc_count u64
        pruned offsets   (n_nodes+1) x u64
        pruned indices   pruned_arc_count x u32
    metadata_length u32
    metadata        UTF-8 JSON, canonical form (sorted keys, no spaces)

Fixed-width and self-describing: every section boundary follows from the
header and the per-episode counts, so readers in any language can seek
without parsing the metadata.
"""

from __future__ import annotations

import json
import os
import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadMagicError,
    ContainerError,
    CorruptSectionError,
    InvariantViolationError,
    UnsupportedVersionError,
)
from .episode import Episode
from .graphs import GraphStructure, from_csr_arrays
from .prior_config import PriorSample, Task
from .scm import AttributedGraphDataset
from .version import VERSION

MAGIC = b"GPFN"
FORMAT_VERSION = 1
FLAG_CLASSIFICATION = 0x0001
_HEADER = struct.Struct("<4sHHQQIHHH6s")
HEADER_SIZE = _HEADER.size  # 40


@dataclass(frozen=True)
class DatasetContainer:
    """In-memory image of one .gpfn file."""

    dataset: AttributedGraphDataset
    episodes: tuple[Episode, ...]
    metadata: dict
    lappe_k: int = 0

    def header_bytes(self) -> bytes:
        task = self.dataset.task
        flags = FLAG_CLASSIFICATION if task.is_classification else 0
        return _HEADER.pack(
            MAGIC,
            FORMAT_VERSION,
            flags,
            self.dataset.graph.n_nodes,
            self.dataset.graph.n_arcs,
            self.dataset.n_features,
            task.n_classes if task.is_classification else 0,
            self.lappe_k,
            len(self.episodes),
            b"\x00" * 6,
        )


def _prior_summary(prior: PriorSample) -> dict:
    """JSON-safe provenance record; per-node arrays are omitted because
    they are reproducible from (config, seed)."""

    def dcsbm(p) -> dict:
        return {"n": int(p.n), "block_sizes": [int(b) for b in p.block_sizes]}

    return {
        "seed": int(prior.seed),
        "n_total": int(prior.n_total),
        "max_edges": int(prior.max_edges),
        "first_level_sizes": [int(s) for s in prior.first_level_sizes],
        "second_level": dcsbm(prior.second_level_params),
        "first_level": [dcsbm(p) for p in prior.first_level_params],
        "ba": {
            "n_new": int(prior.ba_params.n_new),
            "zipf_a": float(prior.ba_params.zipf_a),
            "d_max": int(prior.ba_params.d_max),
        },
        "scm": {
            "n_layers": int(prior.scm_params.n_layers),
            "hidden_width": int(prior.scm_params.hidden_width),
            "activations": list(prior.scm_params.activations),
            "input_dim": int(prior.scm_params.input_dim),
            "weight_scale": float(prior.scm_params.weight_scale),
            "noise_scale": float(prior.scm_params.noise_scale),
        },
        "mixing_p": float(prior.mixing_p),
        "use_lappe": bool(prior.use_lappe),
        "lappe_k": int(prior.lappe_k),
        "n_features": int(prior.n_features),
        "task": {
            "kind": prior.task.kind,
            "n_classes": int(prior.task.n_classes),
        },
        "context_fraction": float(prior.context_fraction),
        "mgm_fraction": float(prior.mgm_fraction),
    }


def default_metadata(dataset: AttributedGraphDataset) -> dict:
    meta: dict = {
        "format": "gpfn/1",
        "generator": f"graphprior {VERSION}",
        "seed": int(dataset.seed),
    }
    if dataset.prior is not None:
        meta["prior"] = _prior_summary(dataset.prior)
    return meta


def make_container(
    dataset: AttributedGraphDataset,
    episodes: list[Episode] | tuple[Episode, ...] = (),
    metadata: dict | None = None,
) -> DatasetContainer:
    lappe_k = 0
    if dataset.prior is not None and dataset.prior.use_lappe:
        lappe_k = dataset.prior.lappe_k
    return DatasetContainer(
        dataset=dataset,
        episodes=tuple(episodes),
        metadata=default_metadata(dataset) if metadata is None else metadata,
        lappe_k=lappe_k,
    )


def _encode_graph_body(graph: GraphStructure) -> list[bytes]:
    return [
        graph.offsets.astype("<u8").tobytes(),
        graph.indices.astype("<u4").tobytes(),
    ]


def _encode_episode(ep: Episode) -> list[bytes]:
    parts = [
        np.packbits(ep.context_mask.astype(np.uint8), bitorder="little").tobytes(),
        struct.pack("<I", ep.n_positives),
        ep.mgm_positives.astype("<u4").tobytes(),
        ep.mgm_negatives.astype("<u4").tobytes(),
        struct.pack("<Q", ep.pruned_graph.n_arcs),
    ]
    parts.extend(_encode_graph_body(ep.pruned_graph))
    return parts


def container_bytes(container: DatasetContainer) -> bytes:
    ds = container.dataset
    parts: list[bytes] = [container.header_bytes()]
    parts.extend(_encode_graph_body(ds.graph))
    parts.append(np.ascontiguousarray(ds.features, dtype="<f4").tobytes())
    if ds.task.is_classification:
        parts.append(ds.target.astype("<u2").tobytes())
    else:
        parts.append(ds.target.astype("<f4").tobytes())
    for ep in container.episodes:
        parts.extend(_encode_episode(ep))
    meta = json.dumps(
        container.metadata, sort_keys=True, separators=(",", ":")
    ).encode("utf-8")
    parts.append(struct.pack("<I", len(meta)))
    parts.append(meta)
    return b"".join(parts)


def write_container(container: DatasetContainer, path: str | os.PathLike) -> None:
    payload = container_bytes(container)
    try:
        with open(path, "wb") as fh:
            fh.write(payload)
            fh.flush()
            os.fsync(fh.fileno())
    except OSError as exc:
        raise ContainerError(f"{path}: {exc}") from exc


def write_dataset(
    dataset: AttributedGraphDataset,
    episodes: list[Episode] | tuple[Episode, ...],
    path: str | os.PathLike,
    metadata: dict | None = None,
) -> None:
    """Serialize one dataset with its episodes; fsync before returning."""
    write_container(make_container(dataset, episodes, metadata), path)


class _Cursor:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, size: int, section: str) -> bytes:
        if size < 0 or self.pos + size > len(self.data):
            raise CorruptSectionError(
                section, self.pos, f"needs {size} bytes, file has "
                f"{len(self.data) - self.pos} left"
            )
        out = self.data[self.pos : self.pos + size]
        self.pos += size
        return out

    def array(self, dtype: str, count: int, section: str) -> np.ndarray:
        item = np.dtype(dtype).itemsize
        return np.frombuffer(self.take(item * count, section), dtype=dtype)

    def u32(self, section: str) -> int:
        return struct.unpack("<I", self.take(4, section))[0]

    def u64(self, section: str) -> int:
        return struct.unpack("<Q", self.take(8, section))[0]


def _read_graph_body(
    cur: _Cursor, n: int, arc_count: int, section: str
) -> GraphStructure:
    offsets = cur.array("<u8", n + 1, section).astype(np.int64)
    indices = cur.array("<u4", arc_count, section).astype(np.int32)
    start = cur.pos
    try:
        return from_csr_arrays(n, offsets, indices, validate=True)
    except ValueError as exc:
        raise InvariantViolationError(f"{section} (ends at byte {start}): {exc}") from exc


def _read_episode(cur: _Cursor, graph: GraphStructure) -> Episode:
    n = graph.n_nodes
    section = "episode"
    bitmap = cur.array("u1", (n + 7) // 8, section)
    bits = np.unpackbits(bitmap, bitorder="little")
    if bits[n:].any():
        raise CorruptSectionError(section, cur.pos, "nonzero bitmap padding")
    mask = bits[:n].astype(bool)
    p = cur.u32(section)
    positives = cur.array("<u4", 2 * p, section).astype(np.int64).reshape(p, 2)
    negatives = cur.array("<u4", 2 * p, section).astype(np.int64).reshape(p, 2)
    arc_count = cur.u64(section)
    pruned = _read_graph_body(cur, n, arc_count, "episode pruned graph")
    ep = Episode(
        context_mask=mask,
        mgm_positives=positives,
        mgm_negatives=negatives,
        pruned_graph=pruned,
    )
    _check_episode(ep, graph, cur.pos)
    return ep


def _check_episode(ep: Episode, graph: GraphStructure, offset: int) -> None:
    """Vectorized episode invariants (reader-side; avoids set building)."""

    def bad(msg: str) -> InvariantViolationError:
        return InvariantViolationError(f"episode (ends at byte {offset}): {msg}")

    n = graph.n_nodes
    n_ctx = int(ep.context_mask.sum())
    if not 1 <= n_ctx <= n - 1:
        raise bad("context/query split not a proper partition")
    for name, pairs in (("positives", ep.mgm_positives), ("negatives", ep.mgm_negatives)):
        if pairs.size == 0:
            continue
        if pairs.min() < 0 or pairs.max() >= n:
            raise bad(f"{name} node id out of range")
        if (pairs[:, 0] >= pairs[:, 1]).any():
            raise bad(f"{name} pair not in canonical (low, high) order")
        keys = pairs[:, 0] * n + pairs[:, 1]
        if len(np.unique(keys)) != len(keys):
            raise bad(f"duplicate {name}")
    p = ep.n_positives
    if p and not graph.has_edges(ep.mgm_positives[:, 0], ep.mgm_positives[:, 1]).all():
        raise bad("positive pair is not an edge")
    if p and graph.has_edges(ep.mgm_negatives[:, 0], ep.mgm_negatives[:, 1]).any():
        raise bad("negative pair is an edge")
    if ep.pruned_graph.n_edges != graph.n_edges - p:
        raise bad("pruned edge count mismatch")
    pu, pv = ep.pruned_graph.edge_arrays()
    if len(pu) and not graph.has_edges(pu, pv).all():
        raise bad("pruned graph contains a non-edge")
    if p and ep.pruned_graph.has_edges(
        ep.mgm_positives[:, 0], ep.mgm_positives[:, 1]
    ).any():
        raise bad("pruned graph still contains a positive")


def read_container(path: str | os.PathLike) -> DatasetContainer:
    """Parse and fully validate a .gpfn file."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise ContainerError(f"{path}: {exc}") from exc

    cur = _Cursor(data)
    raw = cur.take(HEADER_SIZE, "header")
    magic, version, flags, n, arc_count, nf, n_classes, lappe_k, n_eps, _pad = (
        _HEADER.unpack(raw)
    )
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(f"version {version}, expected {FORMAT_VERSION}")
    if flags & ~FLAG_CLASSIFICATION:
        raise CorruptSectionError("header", 6, f"unknown flag bits 0x{flags:04x}")
    is_classification = bool(flags & FLAG_CLASSIFICATION)
    if is_classification and n_classes < 2:
        raise CorruptSectionError("header", 28, "classification needs >= 2 classes")
    if not is_classification and n_classes != 0:
        raise CorruptSectionError("header", 28, "regression with nonzero n_classes")

    graph = _read_graph_body(cur, n, arc_count, "graph")
    features = (
        cur.array("<f4", n * nf, "features").astype(np.float32).reshape(n, nf)
    )
    if is_classification:
        target = cur.array("<u2", n, "targets").astype(np.int64)
        task = Task(kind="classification", n_classes=n_classes)
    else:
        target = cur.array("<f4", n, "targets").astype(np.float32)
        task = Task(kind="regression")

    episodes = tuple(_read_episode(cur, graph) for _ in range(n_eps))

    meta_len = cur.u32("metadata")
    meta_raw = cur.take(meta_len, "metadata")
    if cur.pos != len(data):
        raise CorruptSectionError(
            "metadata", cur.pos, f"{len(data) - cur.pos} trailing bytes"
        )
    try:
        metadata = json.loads(meta_raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptSectionError(
            "metadata", len(data) - meta_len, str(exc)
        ) from exc
    if not isinstance(metadata, dict):
        raise CorruptSectionError("metadata", len(data) - meta_len, "not an object")

    seed = int(metadata.get("seed", 0))
    dataset = AttributedGraphDataset(
        graph=graph,
        features=features,
        target=target,
        task=task,
        prior=None,
        seed=seed,
    )
    try:
        dataset.validate()
    except ValueError as exc:
        raise InvariantViolationError(str(exc)) from exc
    return DatasetContainer(
        dataset=dataset, episodes=episodes, metadata=metadata, lappe_k=lappe_k
    )


def read_dataset(
    path: str | os.PathLike,
) -> tuple[AttributedGraphDataset, list[Episode]]:
    """Read a container, returning the dataset and its episodes."""
    container = read_container(path)
    return container.dataset, list(container.episodes)


def expected_file_size(
    n: int, arc_count: int, nf: int, is_classification: bool,
    episode_shapes: list[tuple[int, int]], metadata_len: int,
) -> int:
    """Closed-form layout size; episode_shapes holds (positives, pruned_arcs)."""
    size = HEADER_SIZE + (n + 1) * 8 + arc_count * 4 + n * nf * 4
    size += n * (2 if is_classification else 4)
    for p, pruned_arcs in episode_shapes:
        size += (n + 7) // 8 + 4 + 8 * p * 2 + 8 + (n + 1) * 8 + pruned_arcs * 4
    return size + 4 + metadata_len
