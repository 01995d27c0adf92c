from __future__ import annotations

import hashlib
import random
import secrets
import threading

from typing_extensions import Protocol

from . import API


@API.public
class Rng(Protocol):
    """
    Source of random bytes. Handles are single-owner: every actor keeps its own.
    """

    def token_bytes(self, n: int) -> bytes:
        ...  # pragma: no cover


@API.public
class SeededRng:
    """
    Deterministic rng used by simulations so that a (seed, script) pair always
    yields the same keys, nonces and seals.
    """

    def __init__(self, seed: int) -> None:
        self.seed = seed
        self.__random = random.Random(seed)
        self.__lock = threading.Lock()

    def __repr__(self) -> str:
        return f"SeededRng(seed={self.seed})"

    def token_bytes(self, n: int) -> bytes:
        if n <= 0:
            return b''
        with self.__lock:
            return self.__random.getrandbits(8 * n).to_bytes(n, 'big')

    def fork(self, label: str) -> SeededRng:
        """
        Independent child stream. Forking by label keeps the streams of different
        actors stable when another actor is added to a scenario.
        """
        material = self.seed.to_bytes(8, 'big', signed=False) + label.encode('utf-8')
        return SeededRng(int.from_bytes(hashlib.sha256(material).digest()[:8], 'big'))


@API.public
class SystemRng:
    def __repr__(self) -> str:
        return "SystemRng()"

    def token_bytes(self, n: int) -> bytes:
        return secrets.token_bytes(n)
