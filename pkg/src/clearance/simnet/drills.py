"""
Attack recipes. Each one rewrites a scenario document so that every honest
request is followed by an attack step marked :code:`"attack": true` and expected
to be denied.
"""
from __future__ import annotations

import copy
import enum
from typing import Any, Callable, Dict, List, Mapping

from .scenario import DENIED
from .._internal import API
from ..core.exceptions import ScenarioError

Document = Dict[str, Any]
Step = Dict[str, Any]

THIEF = 'drill-thief'
TAMPER_BYTE_INDEX = 40
TAMPER_NEW_BYTE = 0x5A


@API.public
class Attack(enum.Enum):
    REPLAY = 'replay'
    TAMPER = 'tamper'
    STEAL_CERT = 'steal-cert'


def _requests(doc: Mapping[str, Any]) -> List[int]:
    return [i for i, step in enumerate(doc.get('steps', [])) if step['action'] == 'request']


def _after_each_request(doc: Document, follow: Callable[[Step], List[Step]]) -> Document:
    steps: List[Step] = []
    for step in doc.get('steps', []):
        steps.append(step)
        if step['action'] == 'request' and not step.get('attack', False):
            steps.extend(follow(step))
    doc['steps'] = steps
    return doc


def _replay(doc: Document) -> Document:
    return _after_each_request(doc, lambda _: [
        {'action': 'replay', 'seq': 'last_request', 'expect': DENIED, 'attack': True},
    ])


def _tamper(doc: Document) -> Document:
    return _after_each_request(doc, lambda _: [
        {'action': 'tamper', 'seq': 'last_request', 'byte_index': TAMPER_BYTE_INDEX,
         'new_byte': TAMPER_NEW_BYTE, 'expect': DENIED, 'attack': True},
    ])


def _steal_cert(doc: Document) -> Document:
    """
    A user without any organization copies the victim's certificate and signs
    with its own ephemeral key.
    """
    orgs = {u['name']: u['org'] for u in doc.get('users', []) if 'org' in u}
    names = {u['name'] for u in doc.get('users', [])}
    thief = THIEF
    while thief in names:
        thief += '-'
    doc['users'] = list(doc.get('users', [])) + [{'name': thief}]

    def follow(step: Step) -> List[Step]:
        org = orgs.get(step['user'])
        if org is None:
            return []
        stolen = {k: v for k, v in step.items()
                  if k not in ('user', 'expect', 'expect_answer', 'expect_messages')}
        return [
            {'action': 'steal_certificate', 'thief': thief, 'victim': step['user'],
             'org': org},
            dict(stolen, user=thief, expect=DENIED, attack=True),
        ]

    return _after_each_request(doc, follow)


_RECIPES: Dict[Attack, Callable[[Document], Document]] = {
    Attack.REPLAY: _replay,
    Attack.TAMPER: _tamper,
    Attack.STEAL_CERT: _steal_cert,
}


@API.public
def with_attack(document: Mapping[str, Any], attack: Attack) -> Document:
    """
    Copy of :code:`document` with the attack appended after every honest request.

    Raises:
        ScenarioError: the scenario has no request to attack.
    """
    if not _requests(document):
        raise ScenarioError("Nothing to attack: the scenario makes no request", '$.steps')
    return _RECIPES[attack](copy.deepcopy(dict(document)))
