from clearance._internal.rng import SeededRng, SystemRng


def test_seeded_is_deterministic():
    assert SeededRng(1).token_bytes(16) == SeededRng(1).token_bytes(16)
    assert SeededRng(1).token_bytes(16) != SeededRng(2).token_bytes(16)


def test_lengths():
    rng = SeededRng(3)
    assert rng.token_bytes(0) == b''
    assert rng.token_bytes(-1) == b''
    assert len(rng.token_bytes(33)) == 33
    assert len(SystemRng().token_bytes(12)) == 12


def test_forks_are_independent_and_stable():
    parent = SeededRng(9)
    a = parent.fork('alice').token_bytes(16)
    assert a == SeededRng(9).fork('alice').token_bytes(16)
    assert a != parent.fork('bob').token_bytes(16)

    # forking does not consume the parent's stream
    assert parent.token_bytes(8) == SeededRng(9).token_bytes(8)


def test_repr():
    assert repr(SeededRng(5)) == "SeededRng(seed=5)"
    assert repr(SystemRng()) == "SystemRng()"
