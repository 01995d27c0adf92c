from . import layouts, marker
from .codec import canonical_decode, canonical_encode, register
from .crypto import (DEFAULT_SCHEME, EphemeralKeyPair, gen_ephemeral, gen_keypair,
                     KeyMaterial, KeyPair, open_sealed, PublicKey, Scheme, seal, SealedBlob,
                     sign, SignedBlob, verify)
from .layouts import load_keypair, load_public_key, save_keypair, save_public_key

__all__ = ['layouts', 'marker', 'canonical_decode', 'canonical_encode', 'register',
           'DEFAULT_SCHEME', 'EphemeralKeyPair', 'gen_ephemeral', 'gen_keypair',
           'KeyMaterial', 'KeyPair', 'open_sealed', 'PublicKey', 'Scheme', 'seal',
           'SealedBlob', 'sign', 'SignedBlob', 'verify', 'load_keypair', 'load_public_key',
           'save_keypair', 'save_public_key']
