"""Deterministic random-stream derivation.

Every dataset is identified by a single 64-bit seed. Submodules obtain
independent streams by mixing (seed, module tag, counter) into a Philox
counter-based generator, so concurrent workers never share RNG state and
a dataset's bytes depend only on its seed.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

# Stable tag ids; never renumber, or previously generated datasets change.
_TAGS = {
    "prior": 0,
    "structure": 1,
    "edge_cap": 2,
    "scm_weights": 3,
    "scm_inputs": 4,
    "scm_noise": 5,
    "lappe": 6,
    "designate": 7,
    "episode": 8,
    "stats": 9,
}


def stream(seed: int, tag: str, counter: int = 0) -> np.random.Generator:
    """Return the generator for (seed, tag, counter).

    ``counter`` distinguishes retry attempts and repeated draws under the
    same tag (e.g. episode index, resample attempt).
    """
    if tag not in _TAGS:
        raise KeyError(f"unknown rng tag {tag!r}")
    ss = np.random.SeedSequence(entropy=seed & MASK64, spawn_key=(_TAGS[tag], counter))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(base_seed: int, index: int) -> int:
    """Per-dataset seed used by the CLI: base seed plus index, mod 2^64."""
    return (int(base_seed) + int(index)) & MASK64
