from __future__ import annotations

import threading

from .._internal import API


@API.public
class SimClock:
    """
    Simulated epoch seconds shared by every actor of a run. It never goes back.

    .. doctest:: simnet_clock

        >>> from clearance.simnet import SimClock
        >>> clock = SimClock(start=100)
        >>> clock.advance(20)
        120
        >>> clock.now
        120
    """

    def __init__(self, start: int = 0) -> None:
        if start < 0:
            raise ValueError("start must be a non-negative epoch time")
        self.__now = start
        self.__lock = threading.Lock()

    def __repr__(self) -> str:
        return f"SimClock(now={self.__now})"

    @property
    def now(self) -> int:
        return self.__now

    def advance(self, delta: int) -> int:
        if delta < 0:
            raise ValueError("The clock cannot go back")
        with self.__lock:
            self.__now += delta
            return self.__now

    def advance_to(self, when: int) -> int:
        """ Moves to :code:`when` unless it is already later. """
        with self.__lock:
            self.__now = max(self.__now, when)
            return self.__now
