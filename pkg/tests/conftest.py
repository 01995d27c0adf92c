import os
import uuid

import pytest
from hypothesis import HealthCheck, settings

from clearance._internal.rng import SeededRng
from clearance.envelope import gen_keypair, Scheme

# Property tests carry their own example counts; deselect them with -m "not slow".
settings.register_profile('ci', deadline=None, print_blob=True,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile('dev', deadline=None)
settings.load_profile(os.environ.get('HYPOTHESIS_PROFILE', 'ci'))


@pytest.fixture()
def rng():
    return SeededRng(7)


@pytest.fixture(params=[Scheme.ED25519_X25519, Scheme.MARKER], ids=['real', 'marker'])
def scheme(request):
    return request.param


@pytest.fixture()
def keys(rng, scheme):
    return gen_keypair(rng, scheme)


@pytest.fixture()
def node_id():
    return uuid.UUID(int=0x1234)
