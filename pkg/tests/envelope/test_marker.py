from clearance.envelope import canonical_encode, gen_keypair, open_sealed, Scheme, seal
from clearance.envelope.marker import find_regions, innermost


def test_marker_seal_is_transparent(rng):
    keys = gen_keypair(rng, Scheme.MARKER)
    blob = seal(keys.public, b'plain text', rng)
    assert b'plain text' in blob.ciphertext
    assert open_sealed(keys, blob) == b'plain text'


def test_regions(rng):
    outer = gen_keypair(rng, Scheme.MARKER)
    inner = gen_keypair(rng, Scheme.MARKER)
    nested = canonical_encode(seal(inner.public, b'deep secret', rng))
    data = canonical_encode(seal(outer.public, b'head' + nested + b'tail', rng))

    regions = find_regions(data)
    assert {r.recipient for r in regions} == {outer.public.data, inner.public.data}

    offset = data.index(b'deep secret')
    region = innermost(regions, offset, offset + len(b'deep secret'))
    assert region.recipient == inner.public.data

    offset = data.index(b'tail')
    assert innermost(regions, offset, offset + 4).recipient == outer.public.data
    assert innermost(regions, 0, 1) is None


def test_truncated_seals_are_ignored(rng):
    keys = gen_keypair(rng, Scheme.MARKER)
    data = canonical_encode(seal(keys.public, b'payload', rng))
    assert find_regions(data[:-10]) == []
