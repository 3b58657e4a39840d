import math

import pytest
from hypothesis import given, strategies as st

from photondistill import fock


def test_dimension_small_values():
    assert fock.dimension(0, 1) == 1
    assert fock.dimension(3, 3) == 10
    assert fock.dimension(4, 4) == 35
    assert fock.dimension(16, 16) == math.comb(31, 16)


def test_dimension_rejects_bad_input():
    with pytest.raises(ValueError):
        fock.dimension(-1, 3)
    with pytest.raises(ValueError):
        fock.dimension(2, 0)


def test_patterns_lexicographic_and_complete():
    pats = list(fock.patterns(3, 3))
    assert len(pats) == fock.dimension(3, 3)
    assert pats == sorted(pats)
    assert pats[0] == (0, 0, 3)
    assert pats[-1] == (3, 0, 0)


def test_rank_matches_enumeration_order():
    for n, m in [(2, 3), (3, 3), (4, 2), (3, 5)]:
        for i, p in enumerate(fock.patterns(n, m)):
            assert fock.rank(p) == i
            assert fock.unrank(i, n, m) == p


def test_unrank_out_of_range():
    with pytest.raises(IndexError):
        fock.unrank(fock.dimension(3, 3), 3, 3)


@given(st.lists(st.integers(0, 5), min_size=1, max_size=7))
def test_rank_unrank_round_trip(counts):
    p = tuple(counts)
    n, m = sum(p), len(p)
    assert fock.unrank(fock.rank(p), n, m) == p


@given(st.lists(st.integers(0, 4), min_size=1, max_size=8))
def test_mode_list_round_trip(counts):
    p = tuple(counts)
    modes = fock.to_mode_list(p)
    assert len(modes) == sum(p)
    assert list(modes) == sorted(modes)
    assert fock.to_pattern(modes, len(p)) == p


def test_encode_is_injective_at_desk_scale():
    seen = {fock.encode(p) for p in fock.patterns(4, 4)}
    assert len(seen) == fock.dimension(4, 4)
