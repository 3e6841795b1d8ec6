"""Deterministic RNG tests: cross-checked arithmetic and stream stability."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from maraug import SplitMix64, derive_seed


def splitmix64_numpy(seed: int, n: int) -> list[int]:
    """The same algorithm on numpy uint64 wrapping arithmetic.

    A second route through the mixing function: if the Python-int masking
    in the library ever diverges from true 64-bit arithmetic, these
    disagree.
    """
    with np.errstate(over="ignore"):
        state = np.uint64(seed)
        gamma = np.uint64(0x9E3779B97F4A7C15)
        m1 = np.uint64(0xBF58476D1CE4E5B9)
        m2 = np.uint64(0x94D049BB133111EB)
        out = []
        for _ in range(n):
            state = state + gamma
            z = state
            z = (z ^ (z >> np.uint64(30))) * m1
            z = (z ^ (z >> np.uint64(27))) * m2
            out.append(int(z ^ (z >> np.uint64(31))))
    return out


@given(st.integers(0, 2**64 - 1))
def test_next_u64_matches_uint64_arithmetic(seed):
    stream = SplitMix64(seed)
    ours = [stream.next_u64() for _ in range(4)]
    assert ours == splitmix64_numpy(seed, 4)


def test_stream_matches_published_reference_vector():
    # First three outputs of the reference C implementation seeded with 0.
    stream = SplitMix64(0)
    assert [stream.next_u64() for _ in range(3)] == [
        0xE220A8397B1DCDAF,
        0x6E789E6AA1B965F4,
        0x06C45D188009454F,
    ]


def test_stream_snapshot_is_frozen():
    # Regression pin: these exact values must never change, or every
    # stored plan, split, and texture silently shifts.
    stream = SplitMix64(42)
    assert [stream.next_u64() for _ in range(3)] == [
        13679457532755275413,
        2949826092126892291,
        5139283748462763858,
    ]


def test_uniform_range_and_determinism():
    stream = SplitMix64(7)
    values = [stream.uniform() for _ in range(1000)]
    assert all(0.0 <= v < 1.0 for v in values)
    assert [SplitMix64(7).uniform() for _ in range(1)] == values[:1]

    stream = SplitMix64(7)
    scaled = [stream.uniform(-3.0, 5.0) for _ in range(1000)]
    assert all(-3.0 <= v < 5.0 for v in scaled)


def test_below_bounds_and_errors():
    stream = SplitMix64(9)
    values = [stream.below(10) for _ in range(2000)]
    assert set(values) == set(range(10))
    with pytest.raises(ValueError):
        stream.below(0)


def test_shuffle_is_a_permutation_and_deterministic():
    items = list(range(50))
    a = items.copy()
    SplitMix64(5).shuffle(a)
    assert sorted(a) == items
    assert a != items  # 50! makes identity astronomically unlikely

    b = items.copy()
    SplitMix64(5).shuffle(b)
    assert a == b

    c = items.copy()
    SplitMix64(6).shuffle(c)
    assert a != c


def test_derive_seed_is_stable_and_keyed():
    assert derive_seed(42, "grouped-split") == derive_seed(42, "grouped-split")
    assert derive_seed(42, "a") != derive_seed(42, "b")
    assert derive_seed(1, "a") != derive_seed(2, "a")
    assert 0 <= derive_seed(123, "anything") < 2**64
    # Platform-stability pin.
    assert derive_seed(42, "rain-texture") == 16310531750553895269


def test_derive_seed_wraps_large_seeds():
    assert derive_seed(2**64 + 5, "k") == derive_seed(5, "k")
