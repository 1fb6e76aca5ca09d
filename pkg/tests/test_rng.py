import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from recsim.rng import (STREAM_ITEM, STREAM_PAIRS, STREAM_RUN, STREAM_USERS,
                        derive_run_seed, substream)


def test_stream_tags_are_distinct():
    assert len({STREAM_USERS, STREAM_ITEM, STREAM_RUN, STREAM_PAIRS}) == 4


def test_substream_is_reproducible():
    a = substream(123, STREAM_ITEM, 0, 7).standard_normal(5)
    b = substream(123, STREAM_ITEM, 0, 7).standard_normal(5)
    np.testing.assert_array_equal(a, b)


def test_substream_keys_are_independent():
    base = substream(123, STREAM_ITEM, 0, 7).standard_normal(4)
    for key in [(123, STREAM_ITEM, 0, 8), (123, STREAM_ITEM, 1, 7),
                (123, STREAM_USERS), (124, STREAM_ITEM, 0, 7)]:
        other = substream(*key).standard_normal(4)
        assert not np.array_equal(base, other)


def test_substream_draw_order_prefix_property():
    # a shorter draw sequence is a prefix of a longer one from the same key
    long = substream(5, STREAM_USERS).standard_normal(10)
    short = substream(5, STREAM_USERS).standard_normal(4)
    np.testing.assert_array_equal(long[:4], short)


@given(st.integers(min_value=0, max_value=2**64 - 1),
       st.integers(min_value=0, max_value=10_000))
def test_derive_run_seed_is_a_64_bit_pure_function(master, idx):
    s1 = derive_run_seed(master, idx)
    s2 = derive_run_seed(master, idx)
    assert s1 == s2
    assert 0 <= s1 < 2**64


def test_derive_run_seed_varies_with_both_arguments():
    seeds = {derive_run_seed(m, r) for m in (1, 2, 3) for r in range(50)}
    assert len(seeds) == 150
