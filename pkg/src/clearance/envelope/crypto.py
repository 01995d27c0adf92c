"""
Signatures and confidentiality seals behind one contract, with pluggable schemes.

The default scheme signs with Ed25519 and seals with an ephemeral-static X25519
exchange, HKDF-SHA256 and ChaCha20-Poly1305. A key pair is a 32-byte seed from
which both halves derive, its public key the concatenation of both public halves.
Signature and ciphertext bytes start with the scheme byte.
"""
from __future__ import annotations

import enum
import hashlib
import uuid
from typing import Dict, Optional, Tuple, Union

from cryptography.exceptions import InvalidSignature, InvalidTag
from cryptography.hazmat.primitives import hashes, serialization
from cryptography.hazmat.primitives.asymmetric import ed25519, x25519
from cryptography.hazmat.primitives.ciphers.aead import ChaCha20Poly1305
from cryptography.hazmat.primitives.kdf.hkdf import HKDF
from typing_extensions import final

from .._internal import API
from .._internal.log import get_logger
from .._internal.rng import Rng, SystemRng
from .._internal.utils import Immutable, ValueEquality, ValueObject
from ..core.exceptions import DecryptFailure, MalformedError

logger = get_logger(__name__)


@API.public
class Scheme(enum.Enum):
    MARKER = 0x00
    """Transparent test-only scheme, payloads stay readable."""
    ED25519_X25519 = 0x01


DEFAULT_SCHEME = Scheme.ED25519_X25519


@API.public
@final
class PublicKey(ValueObject):
    __slots__ = ('scheme', 'data')
    scheme: Scheme
    data: bytes

    def fingerprint(self) -> str:
        return hashlib.sha256(bytes([self.scheme.value]) + self.data).hexdigest()[:16]


@API.public
class KeyMaterial(ValueEquality, Immutable):
    __slots__ = ()
    public_key: bytes
    private_key: bytes
    scheme: Scheme

    @property
    def public(self) -> PublicKey:
        return PublicKey(self.scheme, self.public_key)


@API.public
@final
class KeyPair(KeyMaterial):
    """ Long-term key pair of an organization, server or clearance center. """
    __slots__ = ('public_key', 'private_key', 'scheme')

    def __repr__(self) -> str:
        return f"KeyPair(scheme={self.scheme.name}, public={self.public.fingerprint()})"


@API.public
@final
class EphemeralKeyPair(KeyMaterial):
    """
    Pseudonymous key pair of a user. Never registered anywhere: only enrollment
    certificates bind it to memberships.
    """
    __slots__ = ('public_key', 'private_key', 'scheme')

    def __repr__(self) -> str:
        return f"EphemeralKeyPair(scheme={self.scheme.name}, " \
               f"public={self.public.fingerprint()})"


AnyPublic = Union[PublicKey, KeyMaterial]


@API.public
@final
class SignedBlob(ValueObject):
    """
    Payload with a signature over exactly its bytes. The hint names the signing
    node when the receiver needs it to pick a key.
    """
    __slots__ = ('payload', 'signature', 'signer_hint')
    payload: bytes
    signature: bytes
    signer_hint: Optional[uuid.UUID]

    def __init__(self, payload: bytes, signature: bytes,
                 signer_hint: Optional[uuid.UUID] = None) -> None:
        super().__init__(payload=payload, signature=signature, signer_hint=signer_hint)


@API.public
@final
class SealedBlob(ValueObject):
    __slots__ = ('ciphertext', 'recipient_hint')
    ciphertext: bytes
    recipient_hint: Optional[uuid.UUID]

    def __init__(self, ciphertext: bytes, recipient_hint: Optional[uuid.UUID] = None
                 ) -> None:
        super().__init__(ciphertext=ciphertext, recipient_hint=recipient_hint)


@API.private
class Backend:
    scheme: Scheme

    def generate(self, seed: bytes) -> Tuple[bytes, bytes]:
        """ (public, private) from the key seed. """
        raise NotImplementedError()  # pragma: no cover

    @property
    def seed_size(self) -> int:
        return 32

    def sign(self, private: bytes, payload: bytes) -> bytes:
        raise NotImplementedError()  # pragma: no cover

    def verify(self, public: bytes, payload: bytes, signature: bytes) -> bool:
        raise NotImplementedError()  # pragma: no cover

    def seal(self, public: bytes, plaintext: bytes, rng: Rng) -> bytes:
        raise NotImplementedError()  # pragma: no cover

    def open(self, private: bytes, body: bytes) -> bytes:
        raise NotImplementedError()  # pragma: no cover


_BACKENDS: Dict[Scheme, Backend] = {}


@API.private
def register_backend(backend: Backend) -> None:
    _BACKENDS[backend.scheme] = backend


def _backend(scheme: Scheme) -> Backend:
    try:
        return _BACKENDS[scheme]
    except KeyError:
        raise MalformedError(f"No backend for scheme {scheme}")


def _hkdf(material: bytes, info: bytes) -> bytes:
    return HKDF(algorithm=hashes.SHA256(), length=32, salt=None, info=info).derive(material)


_RAW = serialization.Encoding.Raw


class Ed25519X25519Backend(Backend):
    scheme = Scheme.ED25519_X25519
    _SEAL_HEADER = 32 + 12

    @staticmethod
    def _exchange_key(seed: bytes) -> x25519.X25519PrivateKey:
        return x25519.X25519PrivateKey.from_private_bytes(_hkdf(seed, b'clearance x25519'))

    def generate(self, seed: bytes) -> Tuple[bytes, bytes]:
        signing = ed25519.Ed25519PrivateKey.from_private_bytes(seed)
        exchange = self._exchange_key(seed)
        public = (signing.public_key().public_bytes(_RAW, serialization.PublicFormat.Raw)
                  + exchange.public_key().public_bytes(_RAW, serialization.PublicFormat.Raw))
        return public, seed

    def sign(self, private: bytes, payload: bytes) -> bytes:
        return ed25519.Ed25519PrivateKey.from_private_bytes(private).sign(payload)

    def verify(self, public: bytes, payload: bytes, signature: bytes) -> bool:
        if len(public) != 64 or len(signature) != 64:
            return False
        try:
            ed25519.Ed25519PublicKey.from_public_bytes(public[:32]).verify(signature, payload)
        except (InvalidSignature, ValueError):
            return False
        return True

    def seal(self, public: bytes, plaintext: bytes, rng: Rng) -> bytes:
        if len(public) != 64:
            raise MalformedError("Invalid public key")
        recipient = x25519.X25519PublicKey.from_public_bytes(public[32:])
        ephemeral = x25519.X25519PrivateKey.from_private_bytes(rng.token_bytes(32))
        ephemeral_public = ephemeral.public_key().public_bytes(
            _RAW, serialization.PublicFormat.Raw)
        try:
            shared = ephemeral.exchange(recipient)
        except ValueError as e:
            # low order points give an all-zero secret
            raise MalformedError("Invalid public key") from e
        key = _hkdf(shared, b'clearance seal' + ephemeral_public)
        nonce = rng.token_bytes(12)
        return ephemeral_public + nonce + ChaCha20Poly1305(key).encrypt(
            nonce, plaintext, public)

    def open(self, private: bytes, body: bytes) -> bytes:
        if len(body) < self._SEAL_HEADER + 16:
            raise DecryptFailure("Ciphertext too short")
        exchange = self._exchange_key(private)
        ephemeral_public = body[:32]
        nonce = body[32:self._SEAL_HEADER]
        public = self.generate(private)[0]
        try:
            shared = exchange.exchange(x25519.X25519PublicKey.from_public_bytes(
                ephemeral_public))
            key = _hkdf(shared, b'clearance seal' + ephemeral_public)
            return ChaCha20Poly1305(key).decrypt(nonce, body[self._SEAL_HEADER:], public)
        except (InvalidTag, ValueError) as e:
            raise DecryptFailure("Sealed blob does not open with this key") from e


register_backend(Ed25519X25519Backend())


@API.public
def gen_keypair(rng: Rng, scheme: Scheme = DEFAULT_SCHEME) -> KeyPair:
    """
    Fresh long-term key pair. Deterministic under a seeded rng.
    """
    backend = _backend(scheme)
    public, private = backend.generate(rng.token_bytes(backend.seed_size))
    return KeyPair(public, private, scheme)


@API.public
def gen_ephemeral(rng: Rng, scheme: Scheme = DEFAULT_SCHEME) -> EphemeralKeyPair:
    backend = _backend(scheme)
    public, private = backend.generate(rng.token_bytes(backend.seed_size))
    return EphemeralKeyPair(public, private, scheme)


@API.public
def sign(keys: KeyMaterial, payload: bytes, signer_hint: Optional[uuid.UUID] = None
         ) -> SignedBlob:
    signature = _backend(keys.scheme).sign(keys.private_key, payload)
    return SignedBlob(payload, bytes([keys.scheme.value]) + signature, signer_hint)


def _public(key: AnyPublic) -> PublicKey:
    return key.public if isinstance(key, KeyMaterial) else key


@API.public
def verify(key: AnyPublic, blob: SignedBlob) -> bool:
    """
    Whether :code:`blob` was signed by the private half of :code:`key` over exactly
    its payload bytes. A signature of another scheme does not verify.
    """
    public = _public(key)
    backend = _backend(public.scheme)
    signature = blob.signature
    if not signature or signature[0] != public.scheme.value:
        return False
    return backend.verify(public.data, blob.payload, signature[1:])


@API.public
def seal(key: AnyPublic,
         plaintext: bytes,
         rng: Optional[Rng] = None,
         recipient_hint: Optional[uuid.UUID] = None) -> SealedBlob:
    """
    Confidential to the holder of the private half of :code:`key`. Sealing is
    randomized: the same plaintext never produces the same ciphertext twice.
    """
    public = _public(key)
    body = _backend(public.scheme).seal(public.data, plaintext, rng or SystemRng())
    return SealedBlob(bytes([public.scheme.value]) + body, recipient_hint)


@API.public
def open_sealed(keys: KeyMaterial, blob: SealedBlob) -> bytes:
    """
    Raises:
        DecryptFailure: the blob was not sealed to these keys or was altered.
    """
    ciphertext = blob.ciphertext
    if not ciphertext or ciphertext[0] != keys.scheme.value:
        raise DecryptFailure("Sealed with another scheme")
    return _backend(keys.scheme).open(keys.private_key, ciphertext[1:])
