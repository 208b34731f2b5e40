import pytest

from khop.prf import (MAX_BOUND, STREAM_ROOTS, STREAM_SHUFFLE, derive_stream,
                      prf_draw)


def test_purity():
    a = prf_draw(42, 3, 1, 7, 1000)
    b = prf_draw(42, 3, 1, 7, 1000)
    assert a == b


def test_bound_one_always_zero():
    for seed in (0, 1, 2**63, 2**64 - 1):
        for slot in (0, 5, 999):
            assert prf_draw(seed, 0, 0, slot, 1) == 0


def test_draw_in_range():
    for bound in (1, 2, 3, 10, 97, 2**32, MAX_BOUND):
        for slot in range(20):
            v = prf_draw(9, 1, 2, slot, bound)
            assert 0 <= v < bound


def test_bound_validation():
    with pytest.raises(ValueError):
        prf_draw(1, 0, 0, 0, 0)
    with pytest.raises(ValueError):
        prf_draw(1, 0, 0, 0, -3)
    with pytest.raises(ValueError):
        prf_draw(1, 0, 0, 0, MAX_BOUND + 1)


def test_counters_decorrelate():
    base = prf_draw(7, 1, 2, 3, 2**60)
    assert prf_draw(8, 1, 2, 3, 2**60) != base
    assert prf_draw(7, 2, 2, 3, 2**60) != base
    assert prf_draw(7, 1, 3, 3, 2**60) != base
    assert prf_draw(7, 1, 2, 4, 2**60) != base


def test_uniformity_over_slots():
    # 100,000 draws with bound 10: each value within 5% of 10,000
    counts = [0] * 10
    for slot in range(100_000):
        counts[prf_draw(12345, 0, 0, slot, 10)] += 1
    for c in counts:
        assert abs(c - 10_000) <= 500, counts


def test_derive_stream():
    s = derive_stream(99, STREAM_ROOTS)
    assert s == derive_stream(99, STREAM_ROOTS)
    assert s != derive_stream(99, STREAM_SHUFFLE)
    assert s != 99
    assert 0 <= s < 2**64
    # derived streams give different draw sequences
    assert prf_draw(s, 0, 0, 0, 2**60) != prf_draw(99, 0, 0, 0, 2**60)
