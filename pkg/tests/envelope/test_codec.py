import uuid
from decimal import Decimal

import pytest
from hypothesis import given, settings, strategies as st

from clearance.core import (Debit, Enrollment, Grant, ImplicationMap, MalformedError,
                            ParamConstraint, ServiceAgreement, Ticket, TimeOfDay, TimeWindow,
                            Token)
from clearance.envelope import canonical_decode, canonical_encode, register
from clearance.envelope.codec import VERSION
from clearance.protocol import decode_wire

ORG = uuid.UUID(int=3)


def enrollment(name: bytes) -> Enrollment:
    return Enrollment(Token(ORG, name), name)


def test_header():
    data = canonical_encode(Token(ORG, b'x'))
    assert data[0] == VERSION
    assert data[1] == 0x10


def test_labels_are_not_encoded():
    assert canonical_encode(Token(ORG, b'x', label='a')) \
        == canonical_encode(Token(ORG, b'x', label='b'))


def test_sets_are_canonical():
    a, b, c = enrollment(b'a'), enrollment(b'b'), enrollment(b'c')
    first = ImplicationMap([(a, b), (b, c)])
    second = ImplicationMap([(b, c), (a, b)])
    assert canonical_encode(first) == canonical_encode(second)


def test_maps_are_canonical():
    center = uuid.UUID(int=9)
    read, write = (Ticket(Token(center, n)) for n in (b'read', b'write'))
    grants = {enrollment(b'a'): [Grant(read), Grant(write)], enrollment(b'b'): [Grant(read)]}
    reversed_grants = {k: list(reversed(v)) for k, v in reversed(list(grants.items()))}
    assert canonical_encode(ServiceAgreement(ORG, grants)) \
        == canonical_encode(ServiceAgreement(ORG, reversed_grants))


@pytest.mark.parametrize('value', [
    TimeWindow(0, 2 ** 40),
    TimeOfDay(1320, 360),
    Debit(Decimal('12.3456'), unit='EUR', requires_confirmation=True, description='pay'),
    Debit(7),
    ParamConstraint('seat', [b'B', b'A']),
    Grant(Ticket(Token(ORG, b't'), [Debit(3)]), [TimeWindow(1, 2)]),
])
def test_values(value):
    decoded = canonical_decode(canonical_encode(value), type(value))
    assert decoded == value
    assert canonical_encode(decoded) == canonical_encode(value)


def test_decimal_flavor_survives():
    decoded = canonical_decode(canonical_encode(Debit(Decimal('2'))), Debit)
    assert decoded.is_decimal
    assert not canonical_decode(canonical_encode(Debit(2)), Debit).is_decimal


@pytest.mark.parametrize('data', [
    b'',
    b'\x01',
    b'\x02\x10',
    b'\x01\xff',
    'not bytes',
])
def test_malformed(data):
    with pytest.raises(MalformedError):
        canonical_decode(data, Token)


def test_trailing_bytes():
    with pytest.raises(MalformedError, match="trailing"):
        canonical_decode(canonical_encode(Token(ORG, b'x')) + b'\x00', Token)


def test_unexpected_type():
    with pytest.raises(MalformedError):
        canonical_decode(canonical_encode(Token(ORG, b'x')), Ticket)


def test_constructor_validation_is_malformed():
    data = bytearray(canonical_encode(TimeWindow(1, 2)))
    # swap start and end
    data[2:10], data[10:18] = data[10:18], data[2:10]
    with pytest.raises(MalformedError):
        canonical_decode(bytes(data), TimeWindow)


def test_non_canonical_order_is_refused():
    seats = canonical_encode(ParamConstraint('s', [b'A', b'B']))
    a, b = seats.index(b'A'), seats.index(b'B')
    swapped = bytearray(seats)
    swapped[a], swapped[b] = swapped[b], swapped[a]
    with pytest.raises(MalformedError, match="canonical"):
        canonical_decode(bytes(swapped), ParamConstraint)


def test_register_refuses_tag_reuse():
    class Other:
        pass

    with pytest.raises(ValueError):
        register(Other, 0x10, [])


def test_unregistered_type():
    with pytest.raises(TypeError):
        canonical_encode(object())


@pytest.mark.slow
@settings(max_examples=10_000)
@given(st.binary(max_size=200))
def test_decoding_garbage_only_raises_malformed(data):
    for expected in [Token, ServiceAgreement, Debit]:
        try:
            canonical_decode(data, expected)
        except MalformedError:
            pass
    try:
        decode_wire(data)
    except MalformedError:
        pass


@pytest.mark.slow
@settings(max_examples=10_000)
@given(st.binary(min_size=1, max_size=64), st.text(max_size=10),
       st.binary(min_size=1, max_size=64), st.text(max_size=10))
def test_token_encoding_is_injective(value, label, other_value, other_label):
    token = Token(ORG, value, label=label)
    other = Token(ORG, other_value, label=other_label)
    assert canonical_decode(canonical_encode(token), Token) == token
    assert (canonical_encode(token) == canonical_encode(other)) == (token == other)
