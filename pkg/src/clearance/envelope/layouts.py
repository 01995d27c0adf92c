"""
Wire layouts of the core values and of the envelope's own types. Tags are part of
the wire format: never reuse or renumber one.
"""
from __future__ import annotations

from pathlib import Path
from typing import Any, Union

from .codec import (BOOL, BYTES, canonical_decode, canonical_encode, EnumOf, INT, Maybe,
                    MapOf, PairOf, QUANTITY, register, SortedOf, STR, UUID, ValueOf)
from .crypto import (EphemeralKeyPair, KeyMaterial, KeyPair, PublicKey, Scheme, SealedBlob,
                     SignedBlob)
from .._internal import API
from ..core.modifiers import Debit, Modifier, ParamConstraint, TimeOfDay, TimeWindow
from ..core.tokens import (Enrollment, Grant, ImplicationMap, ServiceAgreement, Ticket,
                           Token)

MODIFIERS = SortedOf(ValueOf(Modifier), unique=False)
SCHEME = EnumOf(Scheme)

register(Token, 0x10, [('creator', UUID), ('value', BYTES)])
register(Enrollment, 0x11, [('token', ValueOf(Token)), ('group', BYTES)])
register(Ticket, 0x12, [('token', ValueOf(Token)), ('modifiers', MODIFIERS)])
register(Grant, 0x13, [('ticket', ValueOf(Ticket)), ('modifiers', MODIFIERS)])
register(ImplicationMap, 0x14, [
    ('edges', SortedOf(PairOf(ValueOf(Enrollment), ValueOf(Enrollment)))),
])
register(ServiceAgreement, 0x15, [
    ('consumer_org', UUID),
    ('grants', MapOf(ValueOf(Enrollment), SortedOf(ValueOf(Grant)))),
])

register(TimeWindow, 0x20, [('start', INT), ('end', INT)])
register(TimeOfDay, 0x21, [('start_minute', INT), ('end_minute', INT)])
register(Debit, 0x22, [('remaining', QUANTITY), ('unit', STR),
                       ('requires_confirmation', BOOL), ('description', STR)])
register(ParamConstraint, 0x23, [('param_key', STR), ('allowed_values', SortedOf(BYTES))])

register(PublicKey, 0x30, [('scheme', SCHEME), ('data', BYTES)])
_KEY_FIELDS = [('public_key', BYTES), ('private_key', BYTES), ('scheme', SCHEME)]
register(KeyPair, 0x31, _KEY_FIELDS)
register(EphemeralKeyPair, 0x32, _KEY_FIELDS)
register(SignedBlob, 0x33, [('payload', BYTES), ('signature', BYTES),
                            ('signer_hint', Maybe(UUID))])
register(SealedBlob, 0x34, [('ciphertext', BYTES), ('recipient_hint', Maybe(UUID))])


PathLike = Union[str, Path]


@API.public
def save_keypair(keys: KeyMaterial, path: PathLike) -> None:
    Path(path).write_bytes(canonical_encode(keys))


@API.public
def load_keypair(path: PathLike) -> Any:
    """ KeyPair or EphemeralKeyPair, whichever the file holds. """
    return canonical_decode(Path(path).read_bytes(), (KeyPair, EphemeralKeyPair))


@API.public
def save_public_key(key: Union[PublicKey, KeyMaterial], path: PathLike) -> None:
    public = key.public if isinstance(key, KeyMaterial) else key
    Path(path).write_bytes(canonical_encode(public))


@API.public
def load_public_key(path: PathLike) -> PublicKey:
    return canonical_decode(Path(path).read_bytes(), PublicKey)
