import uuid
from decimal import Decimal

import pytest

from clearance.actors import (AgentConfig, approve, decline, DirectTransport, HeldCertificate,
                              OrgAdmin, RotationPolicy, UserAgent)
from clearance.core import Debit, FailureCode, Grant, ProtocolFailure
from clearance.core.exceptions import HarnessError, RefusalError
from ..utils import Deployment, honest


def paid_deployment(confirmation=True):
    d = Deployment()
    doc = d.resource('doc', cost=Decimal('4'))
    read = d.ticket('read')
    d.allow(read, doc)
    d.agree({'staff': [Grant(read, [Debit(Decimal('10'), unit='EUR',
                                          requires_confirmation=confirmation,
                                          description='paper copy')])]})
    return d, doc, read, d.user('alice', ['staff'])


def test_confirmed_debit_takes_seven_messages():
    d, doc, read, alice = paid_deployment()
    asked = []

    def confirm(unit, amount, description):
        asked.append((unit, amount, description))
        return True

    assert d.request(alice, doc, confirm=confirm) == b'content'
    assert asked == [('EUR', Decimal(4), 'paper copy')]
    assert len(d.net.transcript) == 7
    assert d.center.remaining(d.enrollment('staff'), read.token, 0) == Decimal(6)


def test_declined_debit_is_not_charged():
    d, doc, read, alice = paid_deployment()
    with pytest.raises(ProtocolFailure) as info:
        d.request(alice, doc, confirm=decline)
    assert info.value.code is FailureCode.CONFIRM_REQUIRED
    assert d.center.remaining(d.enrollment('staff'), read.token, 0) == Decimal(10)
    # the correlator waits for the timeout
    assert len(d.center.pending()) == 1


def test_unconfirmed_debit_takes_five_messages():
    d, doc, _, alice = paid_deployment(confirmation=False)
    d.request(alice, doc, confirm=approve)
    assert len(d.net.transcript) == 5
    assert d.net.transcript[3].piggyback


def test_org_admin_members():
    d = Deployment()
    d.org.add_member('alice', ['staff', 'admin'])
    assert d.org.groups('alice') == {d.enrollment('staff'), d.enrollment('admin')}
    d.org.set_groups('alice', ['staff'])
    assert d.org.groups('alice') == {d.enrollment('staff')}
    d.org.remove_member('alice')
    with pytest.raises(RefusalError):
        d.org.groups('alice')
    with pytest.raises(RefusalError):
        d.org.set_groups('alice', ['staff'])
    with pytest.raises(RefusalError):
        d.org.issue_enrollment('alice', d.keys().public, d.now)


def test_enrollments_of_another_org():
    d = Deployment()
    other = OrgAdmin(uuid.UUID(int=4), d.keys())
    with pytest.raises(ValueError):
        d.org.add_member('alice', [other.enrollment('staff')])


def test_members_cannot_carry_debits():
    d = Deployment()
    with pytest.raises(ValueError):
        d.org.add_member('alice', ['staff'], [Debit(3)])
    with pytest.raises(RefusalError):
        d.org.groups('alice')


def test_certificate_expiry():
    d = Deployment()
    d.org.default_expiry = 60
    alice = d.user('alice', [])
    held = alice.certificates()[d.org.id]
    assert held.expiry == d.now + 60
    assert held.issued.certificate.body().ephemeral_key == held.ephemeral.public


def test_removed_member_keeps_its_certificate_until_expiry():
    d, doc, _, alice = honest()
    d.org.remove_member('alice')
    with pytest.raises(RefusalError):
        alice.refresh_enrollments(d.org, 'alice', d.now)
    assert d.request(alice, doc) == b'hello'
    d.clock.advance(d.org.default_expiry + 1)
    with pytest.raises(ProtocolFailure):
        d.request(alice, doc)


@pytest.mark.parametrize('policy,distinct', [
    (RotationPolicy.NEVER, 1),
    (RotationPolicy.ON_REFRESH, 1),
    (RotationPolicy.EVERY_REQUEST, 3),
])
def test_rotation(policy, distinct):
    d, doc, _, _ = honest()
    agent = UserAgent(d.new_id(), d.rng.fork('rotating'), AgentConfig(policy))
    agent.learn_server(d.server.id, d.server.public_key, d.center.id, d.center.public_key)
    agent.refresh_enrollments(d.org, 'alice', d.now)
    d.attach(agent, 'rotating')
    for _ in range(3):
        d.request(agent, doc)
    used = {sent.ephemeral_key for sent in agent.outbox}
    assert len(used) == distinct
    if policy is RotationPolicy.NEVER:
        assert agent.ephemeral_keys() == [agent.ephemeral.public]


def test_stolen_certificate_is_useless():
    d, doc, _, alice = honest()
    thief = UserAgent(d.new_id(), d.rng.fork('thief'))
    thief.learn_server(d.server.id, d.server.public_key, d.center.id, d.center.public_key)
    stolen = alice.certificates()[d.org.id]
    thief.store(HeldCertificate(org=stolen.org, issued=stolen.issued, ephemeral=thief.ephemeral,
                                admin=None, user_ref=''))
    d.attach(thief, 'thief')
    with pytest.raises(ProtocolFailure) as info:
        d.request(thief, doc)
    assert info.value.code is FailureCode.BAD_SIGNATURE


def test_request_without_certificate_or_server():
    d, doc, _, _ = honest()
    nobody = UserAgent(d.new_id(), d.rng.fork('nobody'))
    with pytest.raises(RefusalError):
        d.request(nobody, doc)
    nobody.learn_server(d.server.id, d.server.public_key, d.center.id, d.center.public_key)
    with pytest.raises(ProtocolFailure) as info:
        d.request(nobody, doc)
    assert info.value.code is FailureCode.NOT_AUTHORIZED


def test_producer_admin_edits():
    d, doc, read, alice = honest()
    staff = d.enrollment('staff')
    d.producer.remove_enrollment(d.org.id, staff)
    with pytest.raises(ProtocolFailure):
        d.request(alice, doc)
    d.producer.add_grant(d.org.id, staff, Grant(read))
    assert d.request(alice, doc) == b'hello'
    with pytest.raises(RefusalError):
        d.producer.revoke_grant(uuid.UUID(int=8), staff, read.token)
    assert d.producer.ticket('read') == read
    assert d.org.clearance_centers() == {d.center.id: d.center.public_key}


def test_direct_transport():
    d, doc, _, alice = honest()
    direct = DirectTransport(now=d.now)
    with pytest.raises(HarnessError):
        direct.send(alice.id, d.server.id, b'')
    direct.attach(d.server)
    assert direct.send(alice.id, d.server.id, b'garbage')
