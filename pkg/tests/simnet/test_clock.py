import pytest

from clearance.simnet import SimClock


def test_advance():
    clock = SimClock(start=10)
    assert clock.now == 10
    assert clock.advance(5) == 15
    assert clock.advance(0) == 15
    assert clock.now == 15


def test_advance_to_never_goes_back():
    clock = SimClock(start=100)
    assert clock.advance_to(250) == 250
    assert clock.advance_to(200) == 250
    assert clock.now == 250


def test_invalid():
    with pytest.raises(ValueError):
        SimClock(start=-1)

    clock = SimClock()
    with pytest.raises(ValueError, match="back"):
        clock.advance(-1)
    assert clock.now == 0
