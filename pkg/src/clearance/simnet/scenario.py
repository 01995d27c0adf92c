"""
Scenario runner: builds a world of actors from a JSON document, plays its steps
over the simulated network and reports the outcome of every step next to its
expectation. Runs are a pure function of (seed, document).
"""
from __future__ import annotations

import json
from contextlib import contextmanager
import uuid
from datetime import datetime
from pathlib import Path
from typing import (Any, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple,
                    Union)

from jsonschema import Draft202012Validator
from typing_extensions import final

from .clock import SimClock
from .net import AdversaryAction, AdversarySpec, DropMessage, Network, ReplayMessage, \
    TamperMessage, Transcript
from .privacy import (certificate_pattern, enrollment_pattern, Leak, org_pattern,
                      params_pattern, resource_pattern, scan_transcript, Sensitive,
                      tau_pattern)
from .._internal import API
from .._internal.log import get_logger
from .._internal.rng import SeededRng
from .._internal.utils import FinalImmutable
from ..actors import (AgentConfig, approve, ClearanceCenter, ClearanceConfig, decline,
                      DEFAULT_CERTIFICATE_LIFETIME,
                      negotiate_agreement, OrgAdmin, ProducerAdmin, ResourceKind,
                      ResourceServer, ResourceSpec, RotationPolicy, ServerConfig, UserAgent)
from ..actors.agents import HeldCertificate
from ..core.exceptions import (ClearanceError, MalformedError, MessageDropped, ProtocolFailure,
                               RefusalError, ScenarioError)
from ..core.modifiers import (Debit, Modifier, normalize_quantity, ParamConstraint,
                              TimeOfDay, TimeWindow, use_limit)
from ..core.tokens import Enrollment, Grant, ImplicationMap, Ticket, Token
from ..envelope.codec import canonical_decode
from ..envelope.crypto import gen_keypair, Scheme
from ..protocol.messages import AclEntry, Failure, ServerReply
from ..protocol.wire import message_kind

logger = get_logger(__name__)

SCHEMA_PATH = Path(__file__).with_name('scenario.schema.json')
DEFAULT_SEED = 0
DEFAULT_START = 0

OK = 'ok'
REFUSED = 'Refused'
DROPPED = 'Dropped'
SEALED = 'Sealed'
DENIED = 'denied'

Document = Mapping[str, Any]


###############
# Validation #
###############

@API.public
def scenario_schema() -> Dict[str, Any]:
    """ The JSON schema scenario documents are validated against. """
    with SCHEMA_PATH.open(encoding='utf-8') as f:
        schema: Dict[str, Any] = json.load(f)
    return schema


_VALIDATOR = Draft202012Validator(scenario_schema())


def _json_path(parts: Iterable[Union[str, int]]) -> str:
    path = '$'
    for part in parts:
        path += f'[{part}]' if isinstance(part, int) else f'.{part}'
    return path


@API.public
def validate_scenario(document: object) -> None:
    """
    Raises:
        ScenarioError: with the JSON path of the first violation, schema first,
            then references to undeclared names.
    """
    errors = sorted(_VALIDATOR.iter_errors(document), key=lambda e: list(e.absolute_path))
    if errors:
        error = errors[0]
        raise ScenarioError(error.message, _json_path(error.absolute_path))
    assert isinstance(document, Mapping)
    _check_references(document)


def _check_references(doc: Document) -> None:
    centers = {c['name'] for c in doc.get('clearance_centers', [])}
    orgs = {o['name']: o for o in doc.get('orgs', [])}
    tickets = {t['name'] for t in doc.get('tickets', [])}
    servers = {s['name']: s for s in doc.get('servers', [])}
    users = {u['name'] for u in doc.get('users', [])}

    def need(value: Optional[str], known: Iterable[str], *path: Union[str, int]) -> None:
        if value is not None and value not in known:
            raise ScenarioError(f"Unknown name {value!r}", _json_path(path))

    for key, names in (('clearance_centers', centers), ('orgs', orgs), ('tickets', tickets),
                       ('servers', servers), ('users', users)):
        if len(names) != len(doc.get(key, [])):
            raise ScenarioError("Duplicate names", _json_path([key]))
    for i, t in enumerate(doc.get('tickets', [])):
        need(t['clearance_center'], centers, 'tickets', i, 'clearance_center')
    for i, s in enumerate(doc.get('servers', [])):
        need(s['clearance_center'], centers, 'servers', i, 'clearance_center')
        for j, entry in enumerate(s.get('acl', [])):
            need(entry['ticket'], tickets, 'servers', i, 'acl', j, 'ticket')
            need(entry['resource'], s.get('resources', {}), 'servers', i, 'acl', j, 'resource')
    for i, a in enumerate(doc.get('agreements', [])):
        need(a['org'], orgs, 'agreements', i, 'org')
        need(a['clearance_center'], centers, 'agreements', i, 'clearance_center')
        for j, g in enumerate(a['grants']):
            need(g['ticket'], tickets, 'agreements', i, 'grants', j, 'ticket')
    for i, u in enumerate(doc.get('users', [])):
        need(u.get('org'), orgs, 'users', i, 'org')
        if 'org' in u:
            need(u.get('member', u['name']), orgs[u['org']].get('members', {}),
                 'users', i, 'member')
    for i, step in enumerate(doc.get('steps', [])):
        need(step.get('user'), users, 'steps', i, 'user')
        need(step.get('thief'), users, 'steps', i, 'thief')
        need(step.get('victim'), users, 'steps', i, 'victim')
        need(step.get('server'), servers, 'steps', i, 'server')
        need(step.get('org'), orgs, 'steps', i, 'org')
        need(step.get('ticket'), tickets, 'steps', i, 'ticket')
        need(step.get('clearance_center'), centers, 'steps', i, 'clearance_center')
        if 'server' in step and 'resource' in step:
            need(step['resource'], servers[step['server']].get('resources', {}),
                 'steps', i, 'resource')


@API.public
def load_scenario(path: Union[str, Path]) -> Dict[str, Any]:
    """
    Reads and validates a scenario file.

    Raises:
        OSError: unreadable file.
        ScenarioError: not JSON or not a valid scenario.
    """
    with Path(path).open(encoding='utf-8') as f:
        try:
            document: Dict[str, Any] = json.load(f)
        except json.JSONDecodeError as e:
            raise ScenarioError(f"Invalid JSON: {e.msg}", f"line {e.lineno}") from e
    validate_scenario(document)
    return document


###########
# Parsing #
###########

@API.private
def parse_time(value: Union[int, str]) -> int:
    if isinstance(value, int):
        return value
    return int(datetime.fromisoformat(value.replace('Z', '+00:00')).timestamp())


def _minute(value: str) -> int:
    hours, minutes = value.split(':')
    return int(hours) * 60 + int(minutes)


@API.private
def parse_modifier(spec: Mapping[str, Any]) -> Modifier:
    kind = spec['type']
    if kind == 'time_window':
        return TimeWindow(parse_time(spec['start']), parse_time(spec['end']))
    if kind == 'time_of_day':
        return TimeOfDay(_minute(spec['start']), _minute(spec['end']))
    if kind == 'debit':
        return Debit(normalize_quantity(spec['remaining']), spec.get('unit', 'use'),
                     spec.get('confirm', False), spec.get('description', ''))
    if kind == 'use_limit':
        return use_limit(spec['uses'])
    if kind == 'param':
        return ParamConstraint(spec['key'], [v.encode('utf-8') for v in spec['values']])
    raise ScenarioError(f"Unknown modifier {kind!r}")


@contextmanager
def _at(*path: Union[str, int]) -> Iterator[None]:
    """ Values the schema lets through but the protocol types refuse. """
    try:
        yield
    except (TypeError, ValueError) as e:
        raise ScenarioError(str(e), _json_path(path)) from e


def _modifiers(spec: Mapping[str, Any], *path: Union[str, int]) -> List[Modifier]:
    modifiers = []
    for i, m in enumerate(spec.get('modifiers', [])):
        with _at(*path, 'modifiers', i):
            modifiers.append(parse_modifier(m))
    return modifiers


##########
# World #
##########

@API.public
class World:
    """ Every actor of a scenario, by scenario name. """

    def __init__(self, doc: Document, scheme: Scheme, seed: int,
                 adversary: Optional[AdversarySpec] = None) -> None:
        self.scheme = scheme
        self.rng = SeededRng(seed)
        with _at('start_time'):
            self.clock = SimClock(parse_time(doc.get('start_time', DEFAULT_START)))
        self.net = Network(self.clock, adversary)
        self.__ids = self.rng.fork('ids')
        self.centers: Dict[str, ClearanceCenter] = {}
        self.producers: Dict[str, ProducerAdmin] = {}
        self.tickets: Dict[str, Ticket] = {}
        self.orgs: Dict[str, OrgAdmin] = {}
        self.servers: Dict[str, ResourceServer] = {}
        self.users: Dict[str, UserAgent] = {}
        self.memberships: Dict[str, Tuple[str, str]] = {}
        self.__build(doc)

    def new_id(self) -> uuid.UUID:
        return uuid.UUID(bytes=self.__ids.token_bytes(16), version=4)

    def __keys(self, label: str) -> Tuple[SeededRng, Any]:
        rng = self.rng.fork(label)
        return rng, gen_keypair(rng, self.scheme)

    def __build(self, doc: Document) -> None:
        now = self.clock.now
        for spec in doc.get('clearance_centers', []):
            rng, keys = self.__keys(f"center:{spec['name']}")
            config = ClearanceConfig(spec.get('correlator_timeout',
                                              ClearanceConfig().correlator_timeout))
            center = ClearanceCenter(self.new_id(), keys, rng, config)
            self.centers[spec['name']] = center
            self.producers[spec['name']] = ProducerAdmin(center)
            self.net.attach(center, spec['name'])

        for i, spec in enumerate(doc.get('tickets', [])):
            producer = self.producers[spec['clearance_center']]
            self.tickets[spec['name']] = producer.ticket(spec['name'],
                                                          _modifiers(spec, 'tickets', i))

        for i, spec in enumerate(doc.get('orgs', [])):
            _, keys = self.__keys(f"org:{spec['name']}")
            admin = OrgAdmin(self.new_id(), keys,
                             default_expiry=spec.get('certificate_lifetime',
                                                     DEFAULT_CERTIFICATE_LIFETIME))
            admin.implications = ImplicationMap(
                (admin.enrollment(a), admin.enrollment(b))
                for a, b in spec.get('implications', []))
            for member, m in spec.get('members', {}).items():
                path = ('orgs', i, 'members', member)
                modifiers = _modifiers(m, *path)
                with _at(*path):
                    admin.add_member(member, m['groups'], modifiers)
            self.orgs[spec['name']] = admin

        for i, spec in enumerate(doc.get('servers', [])):
            rng, keys = self.__keys(f"server:{spec['name']}")
            center = self.centers[spec['clearance_center']]
            server = ResourceServer(self.new_id(), keys, center.id, center.public_key,
                                    self.net, rng,
                                    config=ServerConfig(spec.get('replay_window', 300)))
            for name, r in spec.get('resources', {}).items():
                server.add_resource(self.resource(server, name), ResourceSpec(
                    ResourceKind(r['kind']), r.get('content', '').encode('utf-8'),
                    normalize_quantity(r.get('cost', 1))))
            for j, entry in enumerate(spec.get('acl', [])):
                with _at('servers', i, 'acl', j):
                    server.load_acl([self.acl_entry(server, entry, 'servers', i, 'acl', j)])
            self.producers[spec['clearance_center']].register_server(server)
            self.servers[spec['name']] = server
            self.net.attach(server, spec['name'])

        for i, spec in enumerate(doc.get('agreements', [])):
            admin = self.orgs[spec['org']]
            grants: Dict[Enrollment, List[Grant]] = {}
            for j, g in enumerate(spec['grants']):
                modifiers = _modifiers(g, 'agreements', i, 'grants', j)
                grants.setdefault(admin.enrollment(g['enrollment']), []).append(
                    Grant(self.tickets[g['ticket']], modifiers))
            negotiate_agreement(admin, self.producers[spec['clearance_center']], grants)

        for spec in doc.get('users', []):
            rng = self.rng.fork(f"user:{spec['name']}")
            user = UserAgent(self.new_id(), rng,
                             AgentConfig(RotationPolicy(spec.get('rotation', 'on_refresh'))),
                             scheme=self.scheme)
            for server in self.servers.values():
                user.learn_server(server.id, server.public_key, server.clearance_id,
                                  server.clearance_key)
            if 'org' in spec:
                member = spec.get('member', spec['name'])
                self.memberships[spec['name']] = (spec['org'], member)
                user.refresh_enrollments(self.orgs[spec['org']], member, now)
            self.users[spec['name']] = user
            self.net.attach(user, spec['name'])

    def resource(self, server: ResourceServer, name: str) -> Token:
        return Token(server.id, name.encode('utf-8'), label=name)

    def acl_entry(self, server: ResourceServer, entry: Mapping[str, Any],
                  *path: Union[str, int]) -> AclEntry:
        return AclEntry(self.tickets[entry['ticket']].token,
                        self.resource(server, entry['resource']), _modifiers(entry, *path))

    def sensitive(self) -> List[Sensitive]:
        """ What must stay sealed, and to whom, for everything sent so far. """
        centers = frozenset(c.public_key.data for c in self.centers.values())
        items: List[Sensitive] = []
        for admin in self.orgs.values():
            items.append(org_pattern(admin.id, centers))
        for user in self.users.values():
            for held in user.certificates().values():
                items.append(certificate_pattern(held.issued.certificate, centers))
                for e in held.issued.certificate.body().enrollments:
                    items.append(enrollment_pattern(e, centers))
            for sent in user.outbox:
                server = frozenset({sent.server_key.data})
                items.append(resource_pattern(sent.resource, server))
                items.append(tau_pattern(sent.tau, server))
                params = params_pattern(sent.params, server | {sent.ephemeral_key.data})
                if params is not None:
                    items.append(params)
        return list({(i.label, i.pattern, i.readers): i for i in items}.values())


##########
# Report #
##########

@API.public
@final
class StepReport(FinalImmutable):
    """
    Outcome of one step. :code:`messages` counts the wire messages the step
    itself caused, adversary injections excluded.
    """
    __slots__ = ('index', 'action', 'outcome', 'expected', 'messages', 'expected_messages',
                 'attack', 'detail')
    index: int
    action: str
    outcome: str
    expected: Optional[str]
    messages: int
    expected_messages: Optional[int]
    attack: bool
    detail: str

    def __init__(self, index: int, action: str, outcome: str, expected: Optional[str] = None,
                 messages: int = 0, expected_messages: Optional[int] = None,
                 attack: bool = False, detail: str = '') -> None:
        super().__init__(index=index, action=action, outcome=outcome, expected=expected,
                         messages=messages, expected_messages=expected_messages,
                         attack=attack, detail=detail)

    @property
    def matched(self) -> bool:
        if self.expected_messages is not None and self.messages != self.expected_messages:
            return False
        return self.expected is None or outcome_matches(self.outcome, self.expected)

    def to_dict(self) -> Dict[str, Any]:
        return {'index': self.index, 'action': self.action, 'outcome': self.outcome,
                'expected': self.expected, 'matched': self.matched,
                'messages': self.messages, 'expected_messages': self.expected_messages,
                'attack': self.attack, 'detail': self.detail}


@API.public
@final
class InjectionReport(FinalImmutable):
    __slots__ = ('source_seq', 'seq', 'outcome')
    source_seq: int
    seq: int
    outcome: str

    def to_dict(self) -> Dict[str, Any]:
        return {'source_seq': self.source_seq, 'seq': self.seq, 'outcome': self.outcome}


@API.public
class Report:
    """ Outcome of a scenario run. """

    def __init__(self,
                 steps: Sequence[StepReport],
                 transcript: Transcript,
                 injections: Sequence[InjectionReport],
                 leaks: Optional[Sequence[Leak]],
                 names: Mapping[uuid.UUID, str]) -> None:
        self.steps = list(steps)
        self.transcript = transcript
        self.injections = list(injections)
        self.leaks = None if leaks is None else list(leaks)
        self.names = dict(names)

    def __repr__(self) -> str:
        return f"Report(steps={len(self.steps)}, ok={self.ok})"

    @property
    def ok(self) -> bool:
        return all(s.matched for s in self.steps) and not self.leaks

    @property
    def attacks_denied(self) -> bool:
        return all(s.matched for s in self.steps if s.attack) \
            and all(is_denial(i.outcome) for i in self.injections)

    @property
    def digest(self) -> str:
        return self.transcript.digest()

    def mismatches(self) -> List[StepReport]:
        return [s for s in self.steps if not s.matched]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'ok': self.ok,
            'transcript_sha256': self.digest,
            'messages': len(self.transcript),
            'steps': [s.to_dict() for s in self.steps],
            'injections': [i.to_dict() for i in self.injections],
            'privacy_checked': self.leaks is not None,
            'leaks': [str(leak) for leak in self.leaks or []],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


@API.public
def is_denial(outcome: str) -> bool:
    return outcome not in (OK, SEALED) and not outcome.isdigit()


@API.public
def outcome_matches(outcome: str, expected: str) -> bool:
    if expected == DENIED:
        return is_denial(outcome)
    return outcome == expected


@API.public
def classify_reply(reply: bytes, dropped: bool = False) -> str:
    """
    What an observer without keys learns from a reply: the failure code of a
    cleartext failure, :code:`"Sealed"` for anything sealed.
    """
    if dropped:
        return DROPPED
    if not reply:
        return 'Empty'
    try:
        message = canonical_decode(reply, (ServerReply, Failure))
    except MalformedError:
        return message_kind(reply)
    if isinstance(message, Failure):
        return message.code.display_name
    if message.sealed is None and message.failure is not None:
        return message.failure.code.display_name
    return SEALED


##########
# Runner #
##########

def _adversary(doc: Document) -> AdversarySpec:
    actions: List[AdversaryAction] = []
    for a in doc.get('adversary', []):
        if a['type'] == 'replay':
            actions.append(ReplayMessage(a['seq'], a.get('delay', 0)))
        elif a['type'] == 'tamper':
            actions.append(TamperMessage(a['seq'], a['byte_index'], a['new_byte']))
        else:
            actions.append(DropMessage(a['seq']))
    return AdversarySpec(actions)


class _Runner:
    def __init__(self, world: World) -> None:
        self.world = world
        self.last_request: Optional[int] = None

    def run(self, index: int, step: Mapping[str, Any]) -> StepReport:
        net = self.world.net
        start = len(net.transcript)
        injected = len(net.injections)
        action = step['action']
        expected = step.get('expect')
        outcome, detail = getattr(self, f'_{action}')(step)
        if action == 'assert_counter':
            expected = str(step['value'])
        # messages of the step itself, injections by scheduled replays excluded
        new_injections = net.injections[injected:]
        end = min([i.seq for i in new_injections], default=len(net.transcript))
        if action in ('replay', 'tamper'):
            end = len(net.transcript)
        report = StepReport(index=index, action=action, outcome=outcome, expected=expected,
                            messages=end - start,
                            expected_messages=step.get('expect_messages'),
                            attack=bool(step.get('attack', False)),
                            detail=detail)
        logger.debug("scenario.step", index=index, action=action, outcome=outcome,
                     matched=report.matched)
        return report

    def _request(self, step: Mapping[str, Any]) -> Tuple[str, str]:
        world = self.world
        user = world.users[step['user']]
        server = world.servers[step['server']]
        params = {k.encode('utf-8'): v.encode('utf-8')
                  for k, v in step.get('params', {}).items()}
        self.last_request = len(world.net.transcript)
        try:
            answer = user.request_service(world.net, server.id,
                                          world.resource(server, step['resource']), params,
                                          world.clock.now,
                                          approve if step.get('confirm', False) else decline)
        except ProtocolFailure as e:
            return e.code.display_name, e.detail
        except MessageDropped as e:
            return DROPPED, str(e)
        except RefusalError as e:
            return REFUSED, str(e)
        if 'expect_answer' in step and answer != step['expect_answer'].encode('utf-8'):
            return 'WrongAnswer', answer.decode('utf-8', 'replace')
        return OK, answer.decode('utf-8', 'replace')

    def _advance(self, step: Mapping[str, Any]) -> Tuple[str, str]:
        clock = self.world.clock
        if 'seconds' in step:
            clock.advance(step['seconds'])
        else:
            clock.advance_to(parse_time(step['to']))
        return OK, str(clock.now)

    def _refresh(self, step: Mapping[str, Any]) -> Tuple[str, str]:
        world = self.world
        name = step['user']
        org, member = world.memberships.get(name, (step.get('org', ''), name))
        org = step.get('org', org)
        if org not in world.orgs:
            return REFUSED, "No organization"
        try:
            held = world.users[name].refresh_enrollments(world.orgs[org], member,
                                                         world.clock.now)
        except RefusalError as e:
            return REFUSED, str(e)
        return OK, f"expiry={held.expiry}"

    def __seq(self, step: Mapping[str, Any]) -> int:
        seq = step['seq']
        if seq == 'last_request':
            if self.last_request is None:
                raise ScenarioError("No request to refer to")
            return self.last_request
        return int(seq)

    def _replay(self, step: Mapping[str, Any]) -> Tuple[str, str]:
        net = self.world.net
        seq = self.__seq(step)
        entry = net.transcript[seq]
        injection = net.replay(seq, entry.time + step.get('delay', 0))
        return classify_reply(injection.reply, injection.dropped), f"seq={seq}"

    def _tamper(self, step: Mapping[str, Any]) -> Tuple[str, str]:
        net = self.world.net
        seq = self.__seq(step)
        injection = net.tamper(seq, step['byte_index'], step['new_byte'])
        return classify_reply(injection.reply, injection.dropped), f"seq={seq}"

    def _steal_certificate(self, step: Mapping[str, Any]) -> Tuple[str, str]:
        world = self.world
        victim = world.users[step['victim']]
        org = world.orgs[step['org']]
        stolen = victim.certificates().get(org.id)
        if stolen is None:
            return REFUSED, "Victim holds no certificate"
        thief = world.users[step['thief']]
        thief.store(HeldCertificate(org=org.id, issued=stolen.issued,
                                    ephemeral=thief.ephemeral, admin=None, user_ref=''))
        return OK, ''

    def _revoke_acl(self, step: Mapping[str, Any]) -> Tuple[str, str]:
        server = self.world.servers[step['server']]
        resource = (self.world.resource(server, step['resource'])
                    if 'resource' in step else None)
        server.unload_acl(self.world.tickets[step['ticket']].token, resource)
        return OK, ''

    def __producer_of(self, ticket: Ticket) -> ProducerAdmin:
        for producer in self.world.producers.values():
            if producer.center.id == ticket.token.creator:
                return producer
        raise ScenarioError(f"No clearance center minted {ticket.token}")

    def _revoke_grant(self, step: Mapping[str, Any]) -> Tuple[str, str]:
        admin = self.world.orgs[step['org']]
        ticket = self.world.tickets[step['ticket']]
        try:
            self.__producer_of(ticket).revoke_grant(admin.id,
                                                    admin.enrollment(step['enrollment']),
                                                    ticket.token)
        except RefusalError as e:
            return REFUSED, str(e)
        return OK, ''

    def _remove_enrollment(self, step: Mapping[str, Any]) -> Tuple[str, str]:
        admin = self.world.orgs[step['org']]
        enrollment = admin.enrollment(step['enrollment'])
        touched = 0
        for producer in self.world.producers.values():
            if producer.agreement(admin.id) is not None:
                producer.remove_enrollment(admin.id, enrollment)
                touched += 1
        return (OK, f"agreements={touched}") if touched else (REFUSED, "No agreement")

    def _remove_member(self, step: Mapping[str, Any]) -> Tuple[str, str]:
        self.world.orgs[step['org']].remove_member(step['member'])
        return OK, ''

    def _assert_counter(self, step: Mapping[str, Any]) -> Tuple[str, str]:
        server = self.world.servers[step['server']]
        return str(server.counter(self.world.resource(server, step['resource']))), ''

    def _gc(self, step: Mapping[str, Any]) -> Tuple[str, str]:
        center = self.world.centers[step['clearance_center']]
        return OK, f"collected={center.correlator_gc(self.world.clock.now)}"


@API.public
def run_scenario(script: Union[Document, str, Path],
                 *,
                 seed: Optional[int] = None,
                 scheme: Optional[Scheme] = None,
                 adversary: Iterable[AdversaryAction] = ()) -> Report:
    """
    Runs a scenario, given as a document or a path. :code:`seed` and
    :code:`scheme` override the document's, :code:`adversary` adds actions to the
    document's adversary.

    Raises:
        ScenarioError: invalid document, before anything runs.
    """
    if isinstance(script, (str, Path)):
        doc: Document = load_scenario(script)
    else:
        validate_scenario(script)
        doc = script
    if scheme is None:
        scheme = Scheme.MARKER if doc.get('backend') == 'marker' else Scheme.ED25519_X25519
    spec = AdversarySpec(_adversary(doc).actions + tuple(adversary))
    world = World(doc, scheme, doc.get('seed', DEFAULT_SEED) if seed is None else seed, spec)
    runner = _Runner(world)
    steps: List[StepReport] = []
    for index, step in enumerate(doc.get('steps', [])):
        try:
            steps.append(runner.run(index, step))
        except (TypeError, ValueError) as e:
            raise ScenarioError(str(e), f"$.steps[{index}]") from e
        except ClearanceError as e:
            if isinstance(e, ScenarioError):
                raise ScenarioError(str(e), f"$.steps[{index}]") from e
            steps.append(StepReport(index=index, action=step['action'],
                                    outcome=type(e).__name__, expected=step.get('expect'),
                                    messages=0, attack=bool(step.get('attack', False)),
                                    detail=str(e)))
    injections = [InjectionReport(i.source_seq, i.seq, classify_reply(i.reply, i.dropped))
                  for i in world.net.injections]
    forged = {i.seq for i in world.net.injections}
    leaks = scan_transcript(world.net.transcript, world.sensitive(), forged) \
        if scheme is Scheme.MARKER else None
    report = Report(steps, world.net.transcript, injections, leaks, world.net.names())
    logger.info("scenario.finished", steps=len(steps), ok=report.ok,
                messages=len(world.net.transcript))
    return report
