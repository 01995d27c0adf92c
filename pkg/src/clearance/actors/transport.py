"""
How actors reach each other. Actors only ever exchange canonical bytes, so the
same actor code runs over the recording simulated network or over a direct
in-process link.
"""
from __future__ import annotations

import threading
import uuid
from typing import Dict

from typing_extensions import Protocol

from .._internal import API
from ..core.exceptions import HarnessError


@API.public
class Node(Protocol):
    """ Anything that answers the bytes it receives. """

    @property
    def id(self) -> uuid.UUID:
        ...  # pragma: no cover

    def receive(self, src: uuid.UUID, data: bytes, now: int) -> bytes:
        ...  # pragma: no cover


@API.public
class Transport(Protocol):
    """
    Synchronous request/reply link. :code:`piggyback` asks the transport to count
    the reply as part of the request message.
    """

    def send(self, src: uuid.UUID, dst: uuid.UUID, data: bytes, *,
             piggyback: bool = False) -> bytes:
        ...  # pragma: no cover


@API.public
class DirectTransport:
    """
    Unrecorded transport calling nodes in-process, with a fixed time. Mainly for
    tests exercising actors without the simulated network.
    """

    def __init__(self, now: int = 0) -> None:
        self.now = now
        self.__nodes: Dict[uuid.UUID, Node] = {}
        self.__lock = threading.RLock()

    def attach(self, node: Node) -> None:
        with self.__lock:
            self.__nodes[node.id] = node

    def send(self, src: uuid.UUID, dst: uuid.UUID, data: bytes, *,
             piggyback: bool = False) -> bytes:
        with self.__lock:
            node = self.__nodes.get(dst)
        if node is None:
            raise HarnessError(f"Unknown endpoint {dst}")
        return node.receive(src, data, self.now)
