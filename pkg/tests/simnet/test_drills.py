import pytest

from clearance.core import ScenarioError
from clearance.envelope import Scheme
from clearance.simnet import Attack, load_scenario, run_scenario, with_attack
from clearance.simnet.drills import THIEF

from ..utils import SCENARIOS


@pytest.fixture()
def honest():
    return load_scenario(SCENARIOS / 'honest.json')


@pytest.mark.parametrize('attack', list(Attack))
def test_every_attack_is_denied(honest, attack):
    doc = with_attack(honest, attack)
    report = run_scenario(doc)
    attacks = [s for s in report.steps if s.attack]
    assert attacks
    assert all(s.matched for s in attacks), [s.to_dict() for s in attacks]
    assert report.attacks_denied


@pytest.mark.parametrize('attack', list(Attack))
def test_attacks_leak_nothing(honest, attack):
    report = run_scenario(with_attack(honest, attack), scheme=Scheme.MARKER)
    assert report.attacks_denied
    assert report.leaks == []


def test_replay_follows_every_request(honest):
    doc = with_attack(honest, Attack.REPLAY)
    actions = [s['action'] for s in doc['steps']]
    assert actions.count('request') == 3
    # the fixture already replays twice, each request gains one more
    assert actions.count('replay') == 2 + 3
    assert honest['steps'] != doc['steps']


def test_steal_cert_adds_a_thief(honest):
    doc = with_attack(honest, Attack.STEAL_CERT)
    assert doc['users'][-1] == {'name': THIEF}
    thefts = [s for s in doc['steps'] if s['action'] == 'steal_certificate']
    assert {(s['thief'], s['victim'], s['org']) for s in thefts} == {(THIEF, 'alice', 'acme')}
    attempts = [s for s in doc['steps'] if s.get('attack')]
    assert all(s['user'] == THIEF and 'expect_answer' not in s for s in attempts)

    report = run_scenario(doc)
    assert {s.outcome for s in report.steps if s.attack} == {'BadSignature'}


def test_thief_name_is_unique(honest):
    honest['users'].append({'name': THIEF})
    doc = with_attack(honest, Attack.STEAL_CERT)
    assert doc['users'][-1] == {'name': THIEF + '-'}


def test_nothing_to_attack(honest):
    honest['steps'] = [{'action': 'advance', 'seconds': 5}]
    with pytest.raises(ScenarioError) as exc_info:
        with_attack(honest, Attack.TAMPER)
    assert exc_info.value.path == '$.steps'
