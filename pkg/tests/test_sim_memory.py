from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from reapkit.sim.memory import BandwidthExceeded, MemoryModel


def test_single_request_within_budget():
    m = MemoryModel(Fraction(16))
    assert m.request(16) == 1
    assert m.request(8) == 2
    assert m.request(8) == 2
    assert m.request(8) == 3


def test_large_request_spans_cycles():
    m = MemoryModel(Fraction(10))
    assert m.request(35) == 4
    assert m.peak_bytes_per_cycle == 10


def test_earliest_delays_start():
    m = MemoryModel(Fraction(8))
    assert m.request(8, earliest=5) == 6
    assert m.request(0, earliest=3) == 3


def test_fractional_budget():
    m = MemoryModel(Fraction(56, 1) / 3)
    ready = [m.request(8) for _ in range(10)]
    assert ready == sorted(ready)
    assert m.bytes_total == 80
    assert m.peak_bytes_per_cycle <= m.budget


def test_bad_budget():
    with pytest.raises(ValueError):
        MemoryModel(Fraction(0))


def test_note_guards_cap():
    m = MemoryModel(Fraction(4))
    with pytest.raises(BandwidthExceeded):
        m._note(Fraction(5))


@given(
    st.fractions(min_value=Fraction(1, 4), max_value=64),
    st.lists(st.tuples(st.integers(0, 300), st.integers(0, 40)), max_size=60),
)
def test_cap_and_throughput(budget, reqs):
    m = MemoryModel(budget)
    served = 0
    for nbytes, gap in sorted(reqs, key=lambda r: r[1]):
        ready = m.request(nbytes, gap)
        served += nbytes
        assert ready >= gap
        if nbytes:
            # no transfer finishes faster than the cap allows
            assert (ready - gap) * budget >= nbytes
    assert m.peak_bytes_per_cycle <= budget
    assert m.bytes_total == served
