import uuid

import pytest

from clearance.core import HarnessError, MessageDropped
from clearance.simnet import (AdversarySpec, DropMessage, Network, ReplayMessage, SimClock,
                              TamperMessage, Transcript)


class Echo:
    """ Replies with the payload reversed and remembers what it received. """

    def __init__(self, name: int, forward: 'Echo' = None, net: Network = None) -> None:
        self.id = uuid.UUID(int=name)
        self.received = []
        self.forward = forward
        self.net = net

    def receive(self, src, data, now):
        self.received.append((src, data, now))
        if self.forward is not None:
            inner = self.net.send(self.id, self.forward.id, data, piggyback=True)
            return data[::-1] + inner
        return data[::-1]


def make_net(*actions, start=1000):
    net = Network(SimClock(start), AdversarySpec(actions))
    a, b = Echo(1), Echo(2)
    net.attach(a, 'a')
    net.attach(b, 'b')
    return net, a, b


def test_every_message_is_recorded():
    net, a, b = make_net()
    assert net.send(a.id, b.id, b'abc') == b'cba'
    assert len(net.transcript) == 2
    request, reply = list(net.transcript)
    assert (request.seq, request.src, request.dst, request.data) == (0, a.id, b.id, b'abc')
    assert (reply.seq, reply.src, reply.dst, reply.data) == (1, b.id, a.id, b'cba')
    assert request.time == reply.time == 1000
    assert b.received == [(a.id, b'abc', 1000)]
    assert net.name(b.id) == 'b'
    assert net.names() == {a.id: 'a', b.id: 'b'}


def test_piggybacked_reply_shares_the_entry():
    net = Network(SimClock(0))
    c = Echo(3)
    b = Echo(2, forward=c, net=net)
    a = Echo(1)
    for node in (a, b, c):
        net.attach(node)
    assert net.send(a.id, b.id, b'xy') == b'yxyx'
    assert [(e.src, e.dst) for e in net.transcript] == [(a.id, b.id), (b.id, c.id),
                                                         (b.id, a.id)]
    assert net.transcript[1].piggyback == b'yx'
    assert net.transcript[0].piggyback == b''


def test_dropped_piggyback_is_recorded():
    net = Network(SimClock(0), AdversarySpec([DropMessage(1)]))
    c = Echo(3)
    b = Echo(2, forward=c, net=net)
    a = Echo(1)
    for node in (a, b, c):
        net.attach(node)
    with pytest.raises(MessageDropped) as exc_info:
        net.send(a.id, b.id, b'xy')
    assert exc_info.value.seq == 1
    assert c.received == []
    assert [(e.src, e.dst, e.data, e.piggyback) for e in net.transcript] == \
        [(a.id, b.id, b'xy', b''), (b.id, c.id, b'xy', b'')]


def test_transcript_encoding():
    net, a, b = make_net()
    net.send(a.id, b.id, b'one')
    net.clock.advance(3)
    net.send(b.id, a.id, b'two')

    copy = Transcript.decode(net.transcript.encode())
    assert list(copy) == list(net.transcript)
    assert copy.digest() == net.transcript.digest()

    other, a2, b2 = make_net()
    other.send(a2.id, b2.id, b'one')
    assert other.transcript.digest() != net.transcript.digest()


def test_transcript_lookup():
    transcript = Transcript()
    with pytest.raises(HarnessError):
        transcript[0]
    entry = transcript.append(uuid.UUID(int=1), uuid.UUID(int=2), b'x', 5)
    assert transcript[0] is entry
    assert transcript.next_seq() == 1
    assert transcript.since(1) == []
    with pytest.raises(HarnessError):
        transcript[-1]


def test_unknown_endpoint():
    net, a, _ = make_net()
    with pytest.raises(HarnessError, match="Unknown endpoint"):
        net.send(a.id, uuid.UUID(int=99), b'data')


def test_drop():
    net, a, b = make_net(DropMessage(0))
    with pytest.raises(MessageDropped) as exc_info:
        net.send(a.id, b.id, b'abc')
    assert exc_info.value.seq == 0
    assert b.received == []

    # a dropped reply still reached the receiver
    net, a, b = make_net(DropMessage(1))
    with pytest.raises(MessageDropped):
        net.send(a.id, b.id, b'abc')
    assert len(b.received) == 1


def test_tamper_in_flight():
    net, a, b = make_net(TamperMessage(0, 1, ord('X')))
    assert net.send(a.id, b.id, b'abc') == b'cXa'
    # the transcript keeps what the sender sent
    assert net.transcript[0].data == b'abc'


def test_tamper_apply():
    assert TamperMessage(0, 0, 0xFF).apply(b'\x00\x01') == b'\xff\x01'
    assert TamperMessage(0, 5, 0xFF).apply(b'\x00\x01') == b'\x00\xff'
    assert TamperMessage(0, 3, 1).apply(b'') == b''
    with pytest.raises(ValueError):
        TamperMessage(0, 0, 256)


def test_scheduled_replay():
    net, a, b = make_net(ReplayMessage(0, 30))
    net.send(a.id, b.id, b'abc')

    assert [data for _, data, _ in b.received] == [b'abc', b'abc']
    assert b.received[1][2] == 1030
    assert net.clock.now == 1030
    assert len(net.injections) == 1
    injection = net.injections[0]
    assert (injection.source_seq, injection.seq, injection.reply, injection.dropped) == \
        (0, 2, b'cba', False)


def test_equal_scheduled_replays_all_run():
    net, a, b = make_net(ReplayMessage(0, 0), ReplayMessage(0, 0), ReplayMessage(2, 5))
    net.send(a.id, b.id, b'abc')
    assert sorted(i.seq for i in net.injections) == [2, 4, 6]
    assert all(i.reply == b'cba' for i in net.injections)
    assert len(b.received) == 4
    assert net.clock.now == 1005


def test_manual_injection():
    net, a, b = make_net()
    net.send(a.id, b.id, b'abc')

    replay = net.replay(0, at=2000)
    assert replay.reply == b'cba'
    assert net.clock.now == 2000

    tampered = net.tamper(0, 0, ord('z'))
    assert tampered.reply == b'cbz'
    assert [i.source_seq for i in net.injections] == [0, 0]

    with pytest.raises(HarnessError):
        net.replay(42)


def test_dropped_injection():
    net, a, b = make_net(DropMessage(2))
    net.send(a.id, b.id, b'abc')
    injection = net.replay(0)
    assert injection.dropped
    assert injection.reply == b''


def test_schedule_unknown_action():
    net, _, _ = make_net()
    with pytest.raises(TypeError):
        net.schedule(object())
