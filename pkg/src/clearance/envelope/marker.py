"""
Marker crypto: a transparent scheme for simulations only.

Signatures are SHA-256 tags anyone holding the public key could recompute, and
seals keep their payload in the clear behind a header naming the recipient. What
it buys is inspectability: a transcript scanner can tell which sealed region every
byte sits in. Never use it outside tests and drills.
"""
from __future__ import annotations

import hashlib
import hmac
import struct
from typing import Iterator, List, Optional, Tuple

from typing_extensions import final

from .crypto import Backend, register_backend, Scheme
from .._internal import API
from .._internal.rng import Rng
from .._internal.utils import ValueObject
from ..core.exceptions import DecryptFailure

MAGIC = b'MKSEAL'
_PUBLIC_SIZE = 16
_SALT_SIZE = 8
_TAG_SIZE = 8
# scheme byte, magic, recipient, salt, length
HEADER_SIZE = 1 + len(MAGIC) + _PUBLIC_SIZE + _SALT_SIZE + 4


def _public_of(private: bytes) -> bytes:
    return hashlib.sha256(b'marker public' + private).digest()[:_PUBLIC_SIZE]


def _tag(public: bytes, salt: bytes, payload: bytes) -> bytes:
    return hashlib.sha256(b'marker seal' + public + salt + payload).digest()[:_TAG_SIZE]


class MarkerBackend(Backend):
    scheme = Scheme.MARKER

    @property
    def seed_size(self) -> int:
        return 16

    def generate(self, seed: bytes) -> Tuple[bytes, bytes]:
        return _public_of(seed), seed

    def sign(self, private: bytes, payload: bytes) -> bytes:
        return hashlib.sha256(b'marker sig' + _public_of(private) + payload).digest()

    def verify(self, public: bytes, payload: bytes, signature: bytes) -> bool:
        expected = hashlib.sha256(b'marker sig' + public + payload).digest()
        return hmac.compare_digest(expected, signature)

    def seal(self, public: bytes, plaintext: bytes, rng: Rng) -> bytes:
        salt = rng.token_bytes(_SALT_SIZE)
        return (MAGIC + public + salt + struct.pack('>I', len(plaintext)) + plaintext
                + _tag(public, salt, plaintext))

    def open(self, private: bytes, body: bytes) -> bytes:
        header = HEADER_SIZE - 1
        if len(body) < header + _TAG_SIZE or not body.startswith(MAGIC):
            raise DecryptFailure("Not a marker seal")
        public = body[len(MAGIC):len(MAGIC) + _PUBLIC_SIZE]
        if public != _public_of(private):
            raise DecryptFailure("Marker seal addressed to another key")
        salt = body[len(MAGIC) + _PUBLIC_SIZE:header - 4]
        (length,) = struct.unpack('>I', body[header - 4:header])
        if len(body) != header + length + _TAG_SIZE:
            raise DecryptFailure("Marker seal length mismatch")
        payload = body[header:header + length]
        if not hmac.compare_digest(_tag(public, salt, payload), body[header + length:]):
            raise DecryptFailure("Marker seal altered")
        return payload


register_backend(MarkerBackend())


@API.experimental
@final
class SealedRegion(ValueObject):
    """
    Span [start, end) of a marker seal inside some bytes, with the recipient's
    marker public key. :code:`payload_start` is where the cleartext begins.
    """
    __slots__ = ('start', 'payload_start', 'end', 'recipient')
    start: int
    payload_start: int
    end: int
    recipient: bytes

    def contains(self, start: int, end: int) -> bool:
        return self.payload_start <= start and end <= self.end - _TAG_SIZE


@API.experimental
def find_regions(data: bytes) -> List[SealedRegion]:
    """
    Every well-formed marker seal in :code:`data`, nested ones included.
    """
    return list(_scan(data))


def _scan(data: bytes) -> Iterator[SealedRegion]:
    index = data.find(MAGIC)
    while index != -1:
        start = index - 1
        if start >= 0 and data[start] == Scheme.MARKER.value \
                and len(data) >= start + HEADER_SIZE:
            recipient = data[index + len(MAGIC):index + len(MAGIC) + _PUBLIC_SIZE]
            (length,) = struct.unpack('>I', data[start + HEADER_SIZE - 4:
                                                 start + HEADER_SIZE])
            end = start + HEADER_SIZE + length + _TAG_SIZE
            if end <= len(data):
                yield SealedRegion(start, start + HEADER_SIZE, end, recipient)
        index = data.find(MAGIC, index + 1)


@API.experimental
def innermost(regions: List[SealedRegion], start: int, end: int) -> Optional[SealedRegion]:
    """ Smallest region whose payload holds the span [start, end). """
    holders = [r for r in regions if r.contains(start, end)]
    return min(holders, key=lambda r: r.end - r.start) if holders else None
