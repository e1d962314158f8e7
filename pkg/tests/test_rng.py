import numpy as np
import pytest

from graphprior import derive_seed, stream
from graphprior.rng import MASK64


def test_stream_deterministic():
    a = stream(42, "structure").standard_normal(8)
    b = stream(42, "structure").standard_normal(8)
    np.testing.assert_array_equal(a, b)


def test_streams_differ_by_tag():
    a = stream(42, "structure").standard_normal(8)
    b = stream(42, "prior").standard_normal(8)
    assert not np.array_equal(a, b)


def test_streams_differ_by_counter():
    a = stream(42, "structure", 0).standard_normal(8)
    b = stream(42, "structure", 1).standard_normal(8)
    assert not np.array_equal(a, b)


def test_streams_differ_by_seed():
    a = stream(1, "structure").standard_normal(8)
    b = stream(2, "structure").standard_normal(8)
    assert not np.array_equal(a, b)


def test_unknown_tag_rejected():
    with pytest.raises(KeyError):
        stream(0, "nonexistent-tag")


def test_derive_seed_offsets_base():
    assert derive_seed(100, 0) == 100
    assert derive_seed(100, 7) == 107


def test_derive_seed_wraps_to_64_bits():
    assert derive_seed(MASK64, 1) == 0
    assert derive_seed(MASK64, 2) == 1


def test_derived_seeds_give_distinct_streams():
    draws = {stream(derive_seed(5, i), "prior").integers(0, 1 << 62) for i in range(20)}
    assert len(draws) == 20
