"""Standalone reader for .gpfn dataset containers.

Implements the container byte layout independently (no shared code with
the generator) so that the format itself, not a Python API, is the
contract between the two packages. All integers are little-endian; see
the format document shipped with the generator for the field-by-field
layout.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ContainerFormatError

_MAGIC = b"GPFN"
_VERSION = 1
_FLAG_CLASSIFICATION = 0x0001
_KNOWN_FLAGS = _FLAG_CLASSIFICATION
_HEADER = struct.Struct("<4sHHQQIHHH6s")


@dataclass(frozen=True)
class CsrGraph:
    """Symmetric adjacency in compressed sparse row form."""

    n_nodes: int
    offsets: np.ndarray  # (n_nodes + 1,) int64
    indices: np.ndarray  # (arc_count,) int64

    @property
    def n_arcs(self) -> int:
        return len(self.indices)

    @property
    def n_edges(self) -> int:
        return self.n_arcs // 2

    def degrees(self) -> np.ndarray:
        return np.diff(self.offsets)

    def dense_adjacency(self) -> np.ndarray:
        """Boolean (n, n) adjacency matrix; intended for small graphs."""
        adj = np.zeros((self.n_nodes, self.n_nodes), dtype=bool)
        src = np.repeat(np.arange(self.n_nodes), self.degrees())
        adj[src, self.indices] = True
        return adj


@dataclass(frozen=True)
class EpisodeRecord:
    """One pretraining episode: context split, masked edges, pruned graph."""

    context_mask: np.ndarray  # (n_nodes,) bool
    positives: np.ndarray  # (p, 2) int64, canonical (low, high) pairs
    negatives: np.ndarray  # (p, 2) int64
    pruned: CsrGraph

    @property
    def n_context(self) -> int:
        return int(self.context_mask.sum())


@dataclass(frozen=True)
class DatasetRecord:
    """Full contents of one container file."""

    n_nodes: int
    n_features: int
    n_classes: int  # 0 for regression
    lappe_k: int
    graph: CsrGraph
    features: np.ndarray  # (n_nodes, n_features) float32
    targets: np.ndarray  # int64 class ids or float32 values
    episodes: tuple[EpisodeRecord, ...]
    metadata: dict

    @property
    def is_classification(self) -> bool:
        return self.n_classes > 0


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, size: int, what: str) -> bytes:
        end = self.pos + size
        if end > len(self.data):
            raise ContainerFormatError(
                f"truncated {what}: need {size} bytes at offset {self.pos}, "
                f"{len(self.data) - self.pos} available"
            )
        chunk = self.data[self.pos : end]
        self.pos = end
        return chunk

    def array(self, dtype: str, count: int, what: str) -> np.ndarray:
        width = np.dtype(dtype).itemsize
        return np.frombuffer(self.take(width * count, what), dtype=dtype)


def _read_csr(reader: _Reader, n: int, arc_count: int, what: str) -> CsrGraph:
    offsets = reader.array("<u8", n + 1, f"{what} offsets").astype(np.int64)
    indices = reader.array("<u4", arc_count, f"{what} indices").astype(np.int64)
    if offsets[0] != 0 or offsets[-1] != arc_count:
        raise ContainerFormatError(f"{what}: offset array endpoints wrong")
    if (np.diff(offsets) < 0).any():
        raise ContainerFormatError(f"{what}: offsets not monotone")
    if arc_count and (indices.max() >= n or indices.min() < 0):
        raise ContainerFormatError(f"{what}: neighbor id out of range")
    return CsrGraph(n_nodes=n, offsets=offsets, indices=indices)


def _read_episode(reader: _Reader, n: int) -> EpisodeRecord:
    bitmap = reader.array("u1", (n + 7) // 8, "episode bitmap")
    bits = np.unpackbits(bitmap, bitorder="little")
    if bits[n:].any():
        raise ContainerFormatError("episode bitmap has nonzero padding bits")
    mask = bits[:n].astype(bool)
    p = struct.unpack("<I", reader.take(4, "episode positive count"))[0]
    positives = reader.array("<u4", 2 * p, "episode positives")
    negatives = reader.array("<u4", 2 * p, "episode negatives")
    arc_count = struct.unpack("<Q", reader.take(8, "episode pruned arc count"))[0]
    pruned = _read_csr(reader, n, arc_count, "pruned graph")
    return EpisodeRecord(
        context_mask=mask,
        positives=positives.astype(np.int64).reshape(p, 2),
        negatives=negatives.astype(np.int64).reshape(p, 2),
        pruned=pruned,
    )


def read_gpfn(path: str | Path) -> DatasetRecord:
    """Parse one container file into arrays.

    Raises ContainerFormatError on malformed input; performs structural
    checks (magic, version, flags, section sizes, CSR sanity) but not
    the generator's full semantic validation.
    """
    data = Path(path).read_bytes()
    reader = _Reader(data)
    magic, version, flags, n, arc_count, nf, n_classes, lappe_k, n_eps, _ = (
        _HEADER.unpack(reader.take(_HEADER.size, "header"))
    )
    if magic != _MAGIC:
        raise ContainerFormatError(f"not a container file (magic {magic!r})")
    if version != _VERSION:
        raise ContainerFormatError(f"unsupported format version {version}")
    if flags & ~_KNOWN_FLAGS:
        raise ContainerFormatError(f"unknown flag bits 0x{flags:04x}")
    is_classification = bool(flags & _FLAG_CLASSIFICATION)
    if is_classification and n_classes < 2:
        raise ContainerFormatError("classification container with < 2 classes")
    if not is_classification and n_classes:
        raise ContainerFormatError("regression container with nonzero class count")

    graph = _read_csr(reader, n, arc_count, "graph")
    features = reader.array("<f4", n * nf, "features").reshape(n, nf)
    if is_classification:
        targets = reader.array("<u2", n, "targets").astype(np.int64)
        if n and targets.max() >= n_classes:
            raise ContainerFormatError("class id out of range")
    else:
        targets = reader.array("<f4", n, "targets").astype(np.float32)

    episodes = tuple(_read_episode(reader, n) for _ in range(n_eps))

    meta_len = struct.unpack("<I", reader.take(4, "metadata length"))[0]
    meta_raw = reader.take(meta_len, "metadata")
    if reader.pos != len(data):
        raise ContainerFormatError(
            f"{len(data) - reader.pos} unexpected trailing bytes"
        )
    try:
        metadata = json.loads(meta_raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ContainerFormatError(f"metadata is not valid JSON: {exc}") from exc
    if not isinstance(metadata, dict):
        raise ContainerFormatError("metadata is not a JSON object")

    return DatasetRecord(
        n_nodes=n,
        n_features=nf,
        n_classes=n_classes if is_classification else 0,
        lappe_k=lappe_k,
        graph=graph,
        # copy: frombuffer views are read-only, torch wants writable input
        features=np.array(features, dtype=np.float32),
        targets=targets,
        episodes=episodes,
        metadata=metadata,
    )


def list_containers(data_dir: str | Path) -> list[Path]:
    """Sorted .gpfn files under a directory; raises if none exist."""
    files = sorted(Path(data_dir).glob("*.gpfn"))
    if not files:
        raise ContainerFormatError(f"no .gpfn files in {data_dir}")
    return files
