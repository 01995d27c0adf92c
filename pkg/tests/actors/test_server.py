import pytest

from clearance.actors import ReplayCache, ResourceKind, ResourceSpec, ServerConfig
from clearance.core import (FailureCode, Grant, ParamConstraint, ProtocolFailure, TimeOfDay,
                            Token, use_limit)
from clearance.envelope import canonical_decode, canonical_encode
from clearance.envelope.codec import BYTES, MapOf
from clearance.protocol import AclEntry, LoadAcl, NONCE_SIZE, ServerReply, Tau
from ..utils import Deployment, honest


def denial(data: bytes) -> FailureCode:
    reply = canonical_decode(data, ServerReply)
    assert reply.sealed is None
    return reply.failure.code


def test_resource_spec():
    assert ResourceSpec(ResourceKind.FETCH).cost == 1
    with pytest.raises(ValueError):
        ResourceSpec(ResourceKind.FETCH, cost=0)
    with pytest.raises(ValueError):
        ServerConfig(replay_window=-1)


def test_replay_cache():
    cache = ReplayCache(window=10)
    assert cache.check(Tau(100, bytes(NONCE_SIZE)), 100)
    assert not cache.check(Tau(100, bytes(NONCE_SIZE)), 105)
    # too far in the future or the past
    assert not cache.check(Tau(200, b'\x01' * NONCE_SIZE), 100)
    assert not cache.check(Tau(80, b'\x02' * NONCE_SIZE), 100)
    assert len(cache) == 1
    cache.evict(111)
    assert len(cache) == 0


def test_replayed_request_is_refused():
    d = Deployment()
    hits = d.resource('hits', ResourceKind.COUNTER)
    read = d.ticket('read')
    d.allow(read, hits)
    d.agree({'staff': [Grant(read)]})
    alice = d.user('alice', ['staff'])
    assert d.request(alice, hits) == b'1'

    injection = d.net.replay(0)
    assert denial(injection.reply) is FailureCode.REPLAY
    injection = d.net.replay(0, at=d.now + 1000)
    assert denial(injection.reply) is FailureCode.REPLAY
    assert d.server.counter(hits) == 1


def test_tampered_request_is_refused():
    d, doc, _, alice = honest()
    d.request(alice, doc)
    injection = d.net.tamper(0, 40, 0x5A)
    assert denial(injection.reply) is FailureCode.MALFORMED


def test_unknown_resource():
    d, _, read, alice = honest()
    missing = d.resource('missing')
    with pytest.raises(ProtocolFailure) as info:
        d.request(alice, missing)
    assert info.value.code is FailureCode.NOT_AUTHORIZED
    # refused before contacting the clearance center
    assert len(d.net.transcript) == 2


def test_acl_refuses_debits():
    d, doc, read, _ = honest()
    with pytest.raises(ValueError):
        d.server.load_acl([AclEntry(read.token, doc, [use_limit(1)])])


def test_acl_load_and_unload():
    d, doc, read, alice = honest()
    other = d.resource('other')
    d.server.load_acl(LoadAcl([AclEntry(read.token, other)]))
    assert d.server.candidate_tickets(other) == {read.token}
    assert len(d.server.acl_entries()) == 2

    d.server.unload_acl(read.token, other)
    assert d.server.candidate_tickets(other) == frozenset()
    assert d.request(alice, doc) == b'hello'

    d.server.unload_acl(read.token)
    assert d.server.acl() == {}
    with pytest.raises(ProtocolFailure) as info:
        d.request(alice, doc)
    assert info.value.code is FailureCode.NOT_AUTHORIZED


def test_server_modifiers():
    d = Deployment()
    theatre = d.resource('theatre', ResourceKind.ECHO)
    seats = d.ticket('seats')
    d.allow(seats, theatre, [ParamConstraint('seat', [b'A1', b'A2'])])
    d.agree({'staff': [Grant(seats)]})
    alice = d.user('alice', ['staff'])

    answer = d.request(alice, theatre, {b'seat': b'A1'})
    assert answer == MapOf(BYTES, BYTES).to_bytes({b'seat': b'A1'})
    for params in ({b'seat': b'B7'}, {}):
        with pytest.raises(ProtocolFailure) as info:
            d.request(alice, theatre, params)
        assert info.value.code is FailureCode.MODIFIER_DENIED


def test_failures_after_clearance_are_sealed():
    d = Deployment(start=12 * 3600)
    doc = d.resource('doc')
    read = d.ticket('read')
    d.allow(read, doc, [TimeOfDay(0, 60)])
    d.agree({'staff': [Grant(read)]})
    alice = d.user('alice', ['staff'])
    with pytest.raises(ProtocolFailure) as info:
        d.request(alice, doc)
    assert info.value.code is FailureCode.MODIFIER_DENIED
    reply = canonical_decode(d.net.transcript[3].data, ServerReply)
    assert reply.failure is None
    assert reply.sealed is not None


def test_dispatch():
    d = Deployment()
    echo = d.resource('echo', ResourceKind.ECHO)
    hits = d.resource('hits', ResourceKind.COUNTER)
    doc = d.resource('doc', content=b'text')
    assert d.server.dispatch(doc, {}) == b'text'
    assert d.server.dispatch(hits, {}) == b'1'
    assert d.server.dispatch(hits, {}) == b'2'
    assert d.server.counter(hits) == 2
    assert d.server.dispatch(echo, {}) == MapOf(BYTES, BYTES).to_bytes({})
    with pytest.raises(ProtocolFailure):
        d.server.dispatch(Token(d.center.id, b'x'), {})


def test_garbage_gets_a_cleartext_failure():
    d = Deployment()
    reply = d.server.receive(d.org.id, b'garbage', d.now)
    assert denial(reply) is FailureCode.MALFORMED
    assert canonical_encode(canonical_decode(reply, ServerReply)) == reply
