"""
Deterministic in-process network. Every transmitted message is recorded in the
transcript before the receiver sees it, and scripted adversary actions may drop,
alter or replay messages. The network never looks inside a message.
"""
from __future__ import annotations

import hashlib
import threading
import uuid
from typing import Dict, Iterable, Iterator, List, Optional, Tuple, Union

from typing_extensions import final

from .clock import SimClock
from .._internal import API
from .._internal.log import get_logger
from .._internal.utils import ValueObject
from ..actors.transport import Node
from ..core.exceptions import HarnessError, MessageDropped
from ..envelope.codec import (BYTES, canonical_decode, canonical_encode, INT, ListOf,
                              register, UUID, ValueOf)

logger = get_logger(__name__)


@API.public
@final
class TranscriptEntry(ValueObject):
    """
    One transmitted message. A piggybacked reply travels with the request it
    answers and is part of the same entry.
    """
    __slots__ = ('seq', 'src', 'dst', 'data', 'time', 'piggyback')
    seq: int
    src: uuid.UUID
    dst: uuid.UUID
    data: bytes
    time: int
    piggyback: bytes

    def __init__(self, seq: int, src: uuid.UUID, dst: uuid.UUID, data: bytes, time: int,
                 piggyback: bytes = b'') -> None:
        super().__init__(seq=seq, src=src, dst=dst, data=data, time=time,
                         piggyback=piggyback)


@API.private
@final
class TranscriptRecord(ValueObject):
    __slots__ = ('entries',)
    entries: Tuple[TranscriptEntry, ...]

    def __init__(self, entries: Iterable[TranscriptEntry]) -> None:
        super().__init__(entries=tuple(entries))


register(TranscriptEntry, 0x70, [('seq', INT), ('src', UUID), ('dst', UUID), ('data', BYTES),
                                 ('time', INT), ('piggyback', BYTES)])
register(TranscriptRecord, 0x71, [('entries', ListOf(ValueOf(TranscriptEntry)))])


@API.public
class Transcript:
    """ Append-only record of a run, in transmission order. """

    def __init__(self, entries: Iterable[TranscriptEntry] = ()) -> None:
        self.__entries: List[TranscriptEntry] = list(entries)
        self.__lock = threading.Lock()

    def __repr__(self) -> str:
        return f"Transcript(entries={len(self.__entries)})"

    def __len__(self) -> int:
        return len(self.__entries)

    def __iter__(self) -> Iterator[TranscriptEntry]:
        return iter(list(self.__entries))

    def __getitem__(self, seq: int) -> TranscriptEntry:
        if not 0 <= seq < len(self.__entries):
            raise HarnessError(f"No message #{seq}")
        return self.__entries[seq]

    def next_seq(self) -> int:
        return len(self.__entries)

    def append(self, src: uuid.UUID, dst: uuid.UUID, data: bytes, time: int,
               piggyback: bytes = b'') -> TranscriptEntry:
        with self.__lock:
            entry = TranscriptEntry(len(self.__entries), src, dst, data, time, piggyback)
            self.__entries.append(entry)
            return entry

    def attach_reply(self, seq: int, reply: bytes) -> TranscriptEntry:
        """ Completes entry :code:`seq` with the reply that travelled with it. """
        with self.__lock:
            entry = self[seq].replace(piggyback=reply)
            self.__entries[seq] = entry
            return entry

    def since(self, seq: int) -> List[TranscriptEntry]:
        return list(self.__entries[seq:])

    def encode(self) -> bytes:
        return canonical_encode(TranscriptRecord(self.__entries))

    @classmethod
    def decode(cls, data: bytes) -> Transcript:
        return cls(canonical_decode(data, TranscriptRecord).entries)

    def digest(self) -> str:
        return hashlib.sha256(self.encode()).hexdigest()


##############
# Adversary #
##############

@API.public
@final
class ReplayMessage(ValueObject):
    """ Re-sends a byte-exact copy of message :code:`seq`, :code:`delay` seconds later. """
    __slots__ = ('seq', 'delay')
    seq: int
    delay: int


@API.public
@final
class TamperMessage(ValueObject):
    """ Overwrites one byte of message :code:`seq` in flight. """
    __slots__ = ('seq', 'byte_index', 'new_byte')
    seq: int
    byte_index: int
    new_byte: int

    def __init__(self, seq: int, byte_index: int, new_byte: int) -> None:
        if not 0 <= new_byte <= 0xFF:
            raise ValueError("new_byte must be a byte")
        super().__init__(seq=seq, byte_index=byte_index, new_byte=new_byte)

    def apply(self, data: bytes) -> bytes:
        if not data:
            return data
        index = self.byte_index % len(data)
        return data[:index] + bytes([self.new_byte]) + data[index + 1:]


@API.public
@final
class DropMessage(ValueObject):
    __slots__ = ('seq',)
    seq: int


AdversaryAction = Union[ReplayMessage, TamperMessage, DropMessage]


@API.public
@final
class AdversarySpec(ValueObject):
    __slots__ = ('actions',)
    actions: Tuple[AdversaryAction, ...]

    def __init__(self, actions: Iterable[AdversaryAction] = ()) -> None:
        super().__init__(actions=tuple(actions))


@API.public
@final
class Injection(ValueObject):
    """ What happened to a message injected by the adversary. """
    __slots__ = ('source_seq', 'seq', 'reply', 'dropped')
    source_seq: int
    seq: int
    reply: bytes
    dropped: bool


@API.public
class Network:
    """
    Reliable in-order transport between attached nodes. Delivery is synchronous:
    :py:meth:`send` returns the receiver's reply, which is itself recorded as a
    message unless piggybacked.
    """

    def __init__(self, clock: SimClock, adversary: Optional[AdversarySpec] = None) -> None:
        self.clock = clock
        self.transcript = Transcript()
        self.injections: List[Injection] = []
        self.__nodes: Dict[uuid.UUID, Node] = {}
        self.__names: Dict[uuid.UUID, str] = {}
        self.__lock = threading.RLock()
        self.__depth = 0
        self.__drops: Dict[int, DropMessage] = {}
        self.__tampers: Dict[int, List[TamperMessage]] = {}
        self.__replays: List[ReplayMessage] = []
        for action in (adversary or AdversarySpec()).actions:
            self.schedule(action)

    def __repr__(self) -> str:
        return f"Network(nodes={len(self.__nodes)}, messages={len(self.transcript)})"

    def attach(self, node: Node, name: str = '') -> None:
        with self.__lock:
            self.__nodes[node.id] = node
            self.__names[node.id] = name or str(node.id)

    def name(self, node_id: uuid.UUID) -> str:
        return self.__names.get(node_id, str(node_id))

    def names(self) -> Dict[uuid.UUID, str]:
        return dict(self.__names)

    def schedule(self, action: AdversaryAction) -> None:
        with self.__lock:
            if isinstance(action, DropMessage):
                self.__drops[action.seq] = action
            elif isinstance(action, TamperMessage):
                self.__tampers.setdefault(action.seq, []).append(action)
            elif isinstance(action, ReplayMessage):
                self.__replays.append(action)
            else:
                raise TypeError(f"Unknown adversary action {action!r}")

    ############
    # Delivery #
    ############

    def send(self, src: uuid.UUID, dst: uuid.UUID, data: bytes, *,
             piggyback: bool = False) -> bytes:
        """
        Delivers :code:`data` and returns the reply.

        Raises:
            HarnessError: unknown endpoint.
            MessageDropped: the adversary dropped the message or its reply.
        """
        with self.__lock:
            self.__depth += 1
            try:
                reply = self.__exchange(src, dst, data, piggyback)
            finally:
                self.__depth -= 1
            if self.__depth == 0:
                self.__run_due_replays()
            return reply

    def deliver(self, src: uuid.UUID, dst: uuid.UUID, data: bytes) -> bytes:
        return self.send(src, dst, data)

    def __node(self, node_id: uuid.UUID) -> Node:
        node = self.__nodes.get(node_id)
        if node is None:
            raise HarnessError(f"Unknown endpoint {node_id}")
        return node

    def __in_flight(self, seq: int, data: bytes) -> bytes:
        if seq in self.__drops:
            logger.debug("simnet.dropped", seq=seq)
            raise MessageDropped(seq)
        for tamper in self.__tampers.get(seq, ()):
            logger.debug("simnet.tampered", seq=seq, index=tamper.byte_index)
            data = tamper.apply(data)
        return data

    def __exchange(self, src: uuid.UUID, dst: uuid.UUID, data: bytes, piggyback: bool
                   ) -> bytes:
        node = self.__node(dst)
        now = self.clock.now
        entry = self.transcript.append(src, dst, data, now)
        reply = node.receive(src, self.__in_flight(entry.seq, data), now)
        if piggyback:
            self.transcript.attach_reply(entry.seq, reply)
            return reply

        reply_entry = self.transcript.append(dst, src, reply, self.clock.now)
        return self.__in_flight(reply_entry.seq, reply)

    #############
    # Injection #
    #############

    def __run_due_replays(self) -> None:
        # injecting sends, which may run the remaining replays first
        while True:
            due = [i for i, r in enumerate(self.__replays) if r.seq < len(self.transcript)]
            if not due:
                return
            replay = self.__replays.pop(due[0])
            entry = self.transcript[replay.seq]
            self.clock.advance_to(entry.time + replay.delay)
            self.inject(replay.seq, entry.data)

    def replay(self, seq: int, at: Optional[int] = None) -> Injection:
        """ Re-sends a byte-exact copy of message :code:`seq`, at time :code:`at`. """
        entry = self.transcript[seq]
        if at is not None:
            self.clock.advance_to(at)
        return self.inject(seq, entry.data)

    def tamper(self, seq: int, byte_index: int, new_byte: int, at: Optional[int] = None
               ) -> Injection:
        """ Re-sends message :code:`seq` with one byte overwritten. """
        entry = self.transcript[seq]
        if at is not None:
            self.clock.advance_to(at)
        return self.inject(seq, TamperMessage(seq, byte_index, new_byte).apply(entry.data))

    def inject(self, source_seq: int, data: bytes) -> Injection:
        entry = self.transcript[source_seq]
        logger.info("simnet.injected", source=source_seq, to=self.name(entry.dst))
        seq = self.transcript.next_seq()
        try:
            reply = self.send(entry.src, entry.dst, data)
        except MessageDropped:
            injection = Injection(source_seq, seq, b'', True)
        else:
            injection = Injection(source_seq, seq, reply, False)
        self.injections.append(injection)
        return injection


@API.public
def adversary_replay(net: Network, seq: int, at: Optional[int] = None) -> Injection:
    return net.replay(seq, at)


@API.public
def adversary_tamper(net: Network, seq: int, byte_index: int, new_byte: int,
                     at: Optional[int] = None) -> Injection:
    return net.tamper(seq, byte_index, new_byte, at)
