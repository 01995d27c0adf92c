"""
Command line surface. Every actor lives in plain files of a state directory and
every command is a deterministic in-process run under :code:`--seed`.

Exit codes: 0 success, 2 validation failure, 3 IO failure, 4 assertion mismatch
or denied request.
"""
from __future__ import annotations

import enum
import functools
import json
import sys
import uuid
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Mapping, Optional, Tuple, TypeVar

import click
from click.core import ParameterSource
from jsonschema import Draft202012Validator
from typing_extensions import final

from ._internal import API
from ._internal.log import configure_logging, get_logger
from ._internal.rng import SeededRng
from ._internal.utils import FinalImmutable, ValueObject
from .actors import (approve, ClearanceCenter, decline, negotiate_agreement, OrgAdmin,
                     ProducerAdmin, ResourceKind, ResourceServer, ResourceSpec, UserAgent)
from .actors.agents import HeldCertificate
from .core.exceptions import (ConfigurationError, HarnessError, MalformedError,
                              ProtocolFailure, RefusalError, ScenarioError)
from .core.modifiers import normalize_quantity
from .core.tokens import Enrollment, Grant, ImplicationMap, Token
from .envelope.codec import canonical_decode, canonical_encode, EnumOf, register, STR, \
    UUID, ValueOf
from .envelope.crypto import EphemeralKeyPair, gen_ephemeral, gen_keypair, KeyPair, Scheme
from .envelope.layouts import load_keypair, save_keypair, save_public_key
from .envelope.marker import find_regions
from .protocol.messages import AclEntry, IssueEnrollment, LoadAcl
from .protocol.wire import message_kind
from .simnet import (Attack, load_scenario, Network, Report, run_scenario, scenario_schema,
                     SimClock, Transcript, with_attack)
from .simnet.scenario import parse_modifier

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_MISMATCH = 4

DEFAULT_STATE_DIR = '.clearance'


@API.public
class Role(enum.Enum):
    ORG = 'org'
    CENTER = 'center'
    SERVER = 'server'


@API.public
@final
class CliConfig(FinalImmutable):
    """
    Options shared by every command. :code:`backend` is :code:`None` when the
    command should use its input's backend, the real one for plain files.
    """
    __slots__ = ('state_dir', 'seed', 'backend', 'output_format', 'unsafe')
    state_dir: Path
    seed: int
    backend: Optional[Scheme]
    output_format: str
    unsafe: bool

    def __init__(self,
                 state_dir: Path,
                 seed: int = 0,
                 backend: Optional[Scheme] = None,
                 output_format: str = 'text',
                 unsafe: bool = False) -> None:
        if not 0 <= seed < 2 ** 64:
            raise ConfigurationError(f"Seed {seed} is not an unsigned 64-bit integer")
        if output_format not in ('text', 'json'):
            raise ConfigurationError(f"Unknown output format {output_format!r}")
        super().__init__(state_dir=Path(state_dir), seed=seed, backend=backend,
                         output_format=output_format, unsafe=unsafe)

    def scheme(self, requested: Optional[Scheme] = None) -> Scheme:
        """
        Raises:
            ConfigurationError: marker crypto without the unsafe flag.
        """
        scheme = self.backend or requested or Scheme.ED25519_X25519
        if scheme is Scheme.MARKER and not self.unsafe:
            raise ConfigurationError(
                "Marker crypto offers no protection, pass --unsafe-marker-crypto to use it")
        return scheme

    def rng(self, label: str) -> SeededRng:
        return SeededRng(self.seed).fork(label)

    def path(self, name: str, suffix: str) -> Path:
        return self.state_dir / f"{name}{suffix}"

    @property
    def json(self) -> bool:
        return self.output_format == 'json'


@API.private
@final
class Identity(ValueObject):
    """ Long-term identity of an organization, clearance center or server. """
    __slots__ = ('role', 'name', 'node', 'keys')
    role: Role
    name: str
    node: uuid.UUID
    keys: KeyPair


register(Identity, 0x80, [
    ('role', EnumOf(Role, {Role.ORG: 1, Role.CENTER: 2, Role.SERVER: 3})),
    ('name', STR),
    ('node', UUID),
    ('keys', ValueOf(KeyPair)),
])


#########
# Files #
#########

_ID = '.id'
_PUBLIC = '.pub'
_ROSTER = '.roster.json'
_CERTIFICATE = '.cert'
_EPHEMERAL = '.ephemeral'
_STATE = '.state'
_ACL = '.acl'
_RESOURCES = '.resources.json'
_TRANSCRIPT = '.transcript'


def _read_bytes(path: Path) -> bytes:
    return path.read_bytes()


def _write_bytes(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)


def _read_json(path: Path) -> Any:
    try:
        return json.loads(path.read_text(encoding='utf-8'))
    except json.JSONDecodeError as e:
        raise ScenarioError(f"Invalid JSON: {e.msg}", f"{path}:{e.lineno}") from e


def _write_json(path: Path, value: Any) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(value, indent=2, sort_keys=True) + '\n', encoding='utf-8')


def _identity(config: CliConfig, name: str, role: Role) -> Identity:
    identity = canonical_decode(_read_bytes(config.path(name, _ID)), Identity)
    if identity.role is not role:
        raise RefusalError(f"{name!r} is a {identity.role.value}, not a {role.value}")
    return identity


def _center(config: CliConfig, identity: Identity) -> ClearanceCenter:
    center = ClearanceCenter(identity.node, identity.keys,
                             config.rng(f"center:{identity.name}"))
    state = config.path(identity.name, _STATE)
    if state.exists():
        center.load_state(_read_bytes(state))
    return center


def _save_center(config: CliConfig, name: str, center: ClearanceCenter) -> None:
    _write_bytes(config.path(name, _STATE), center.dump_state())


##############
# Validation #
##############

def _grants_schema() -> Dict[str, Any]:
    return {
        '$schema': 'https://json-schema.org/draft/2020-12/schema',
        '$defs': scenario_schema()['$defs'],
        'type': 'object',
        'required': ['grants'],
        'additionalProperties': False,
        'properties': {
            'implications': {
                'type': 'array',
                'items': {'type': 'array', 'prefixItems': [{'$ref': '#/$defs/name'}] * 2,
                          'minItems': 2, 'maxItems': 2},
            },
            'grants': {
                'type': 'array',
                'items': {
                    'type': 'object',
                    'required': ['enrollment', 'ticket'],
                    'additionalProperties': False,
                    'properties': {
                        'enrollment': {'$ref': '#/$defs/name'},
                        'ticket': {'$ref': '#/$defs/name'},
                        'ticket_modifiers': {'$ref': '#/$defs/modifiers'},
                        'modifiers': {'$ref': '#/$defs/modifiers'},
                    },
                },
            },
        },
    }


def _validate(document: object, schema: Mapping[str, Any]) -> None:
    errors = sorted(Draft202012Validator(schema).iter_errors(document),
                    key=lambda e: list(e.absolute_path))
    if errors:
        error = errors[0]
        path = '$' + ''.join(f'[{p}]' if isinstance(p, int) else f'.{p}'
                             for p in error.absolute_path)
        raise ScenarioError(error.message, path)


def _parse_pairs(values: Iterable[str], what: str) -> List[Tuple[str, str]]:
    pairs = []
    for value in values:
        key, sep, rest = value.partition('=')
        if not sep or not key:
            raise ScenarioError(f"Expected KEY=VALUE, got {value!r}", what)
        pairs.append((key, rest))
    return pairs


##########
# Output #
##########

def _emit(config: CliConfig, text: str, record: Mapping[str, Any]) -> None:
    if config.json:
        click.echo(json.dumps(record, sort_keys=True))
    else:
        click.echo(text)


def _report(config: CliConfig, report: Report, out: Optional[Path]) -> None:
    if out is not None:
        out.write_text(report.to_json() + '\n', encoding='utf-8')
    if config.json:
        click.echo(report.to_json())
        return
    for step in report.steps:
        mark = 'ok' if step.matched else 'MISMATCH'
        expected = '' if step.expected is None else f" expected={step.expected}"
        attack = ' attack' if step.attack else ''
        click.echo(f"{step.index:>3} {step.action:<18} {step.outcome:<16}"
                   f" messages={step.messages}{expected}{attack} {mark}")
    for injection in report.injections:
        click.echo(f"  injected #{injection.seq} (copy of #{injection.source_seq}):"
                   f" {injection.outcome}")
    if report.leaks is not None:
        click.echo(f"privacy: {len(report.leaks)} leak(s)")
        for leak in report.leaks:
            click.echo(f"  {leak}")
    click.echo(f"transcript sha256 {report.digest} ({len(report.transcript)} messages)")


###########
# Command #
###########

F = TypeVar('F', bound=Callable[..., Any])


def _exit_codes(f: F) -> F:
    """ Maps the error hierarchy onto the exit code contract. """

    @functools.wraps(f)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return f(*args, **kwargs)
        except (ScenarioError, ConfigurationError, RefusalError, MalformedError,
                HarnessError) as e:
            click.echo(f"error: {type(e).__name__}: {e}", err=True)
            sys.exit(EXIT_VALIDATION)
        except ProtocolFailure as e:
            click.echo(f"denied: {e.code.display_name}"
                       + (f": {e.detail}" if e.detail else ''), err=True)
            sys.exit(EXIT_MISMATCH)
        except OSError as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(EXIT_IO)

    return wrapper  # type: ignore


@click.group()
@click.option('--state-dir', type=click.Path(file_okay=False, path_type=Path),
              envvar='CLEARANCE_STATE_DIR', default=DEFAULT_STATE_DIR, show_default=True,
              help='Directory holding keys, certificates and clearance state.')
@click.option('--seed', type=click.IntRange(0, 2 ** 64 - 1), envvar='CLEARANCE_SEED',
              default=0, show_default=True, help='Seed of every key, nonce and seal.')
@click.option('--backend', type=click.Choice(['real', 'marker']), envvar='CLEARANCE_BACKEND',
              default=None, help='Crypto backend, the input\'s own by default.')
@click.option('--unsafe-marker-crypto', 'unsafe', is_flag=True,
              help='Allow the transparent test-only marker backend.')
@click.option('--format', 'output_format', type=click.Choice(['text', 'json']),
              envvar='CLEARANCE_FORMAT', default='text', show_default=True)
@click.option('-v', '--verbose', count=True, help='-v info, -vv debug logs on stderr.')
@click.pass_context
def main(ctx: click.Context, state_dir: Path, seed: int, backend: Optional[str],
         unsafe: bool, output_format: str, verbose: int) -> None:
    """
    Enrollment and ticket authorization: administer organizations, clearance
    centers and servers, run scenarios and attack drills, inspect transcripts.
    """
    configure_logging(verbose, json=output_format == 'json')
    scheme = None if backend is None else (Scheme.MARKER if backend == 'marker'
                                           else Scheme.ED25519_X25519)
    ctx.obj = CliConfig(state_dir, seed, scheme, output_format, unsafe)


@main.command()
@click.argument('role', type=click.Choice([r.value for r in Role]))
@click.argument('name')
@click.pass_obj
@_exit_codes
def keygen(config: CliConfig, role: str, name: str) -> None:
    """ Creates the identity and key pair of an organization, center or server. """
    rng = config.rng(f"{role}:{name}")
    identity = Identity(role=Role(role), name=name,
                        node=uuid.UUID(bytes=rng.token_bytes(16), version=4),
                        keys=gen_keypair(rng, config.scheme()))
    _write_bytes(config.path(name, _ID), canonical_encode(identity))
    save_public_key(identity.keys, config.path(name, _PUBLIC))
    _emit(config, f"{role} {name} {identity.node} {identity.keys.public.fingerprint()}",
          {'role': role, 'name': name, 'id': str(identity.node),
           'fingerprint': identity.keys.public.fingerprint()})


@main.command()
@click.argument('org')
@click.argument('user')
@click.option('-g', '--group', 'groups', multiple=True,
              help='Membership class, repeatable. Without any, USER must be a member.')
@click.option('--now', type=int, default=0, show_default=True, help='Issue time.')
@click.option('--lifetime', type=click.IntRange(min=1), default=None,
              help='Certificate lifetime in seconds.')
@click.pass_obj
@_exit_codes
def enroll(config: CliConfig, org: str, user: str, groups: Tuple[str, ...], now: int,
           lifetime: Optional[int]) -> None:
    """ Issues USER a certificate of ORG bound to a fresh ephemeral key. """
    identity = _identity(config, org, Role.ORG)
    admin = OrgAdmin(identity.node, identity.keys)
    if lifetime is not None:
        admin.default_expiry = lifetime
    roster_path = config.path(org, _ROSTER)
    roster: Dict[str, Any] = _read_json(roster_path) if roster_path.exists() else {}
    if groups:
        roster[user] = {'groups': sorted(set(groups))}
    for member, spec in roster.items():
        admin.add_member(member, spec['groups'])
    ephemeral = gen_ephemeral(config.rng(f"user:{user}"), identity.keys.scheme)
    issued = admin.issue_enrollment(user, ephemeral.public, now)
    _write_json(roster_path, roster)
    save_keypair(ephemeral, config.path(user, _EPHEMERAL))
    _write_bytes(config.path(user, _CERTIFICATE), canonical_encode(issued))
    _emit(config, f"{user}: certificate of {org} expiring at {issued.expiry}",
          {'user': user, 'org': org, 'expiry': issued.expiry,
           'groups': roster[user]['groups']})


@main.command()
@click.argument('org')
@click.argument('center')
@click.argument('grants_file', type=click.Path(dir_okay=False, path_type=Path))
@click.pass_obj
@_exit_codes
def agree(config: CliConfig, org: str, center: str, grants_file: Path) -> None:
    """
    Registers at CENTER the agreement with ORG described by GRANTS_FILE, a JSON
    document of grants (enrollment, ticket, modifiers) and implications.
    """
    document = _read_json(grants_file)
    _validate(document, _grants_schema())
    org_identity = _identity(config, org, Role.ORG)
    center_identity = _identity(config, center, Role.CENTER)
    clearance = _center(config, center_identity)
    admin = OrgAdmin(org_identity.node, org_identity.keys)
    admin.implications = ImplicationMap(
        (admin.enrollment(a), admin.enrollment(b)) for a, b in document.get('implications', []))
    producer = ProducerAdmin(clearance)
    grants: Dict[Enrollment, List[Grant]] = {}
    for g in document['grants']:
        ticket = producer.ticket(g['ticket'],
                                 [parse_modifier(m) for m in g.get('ticket_modifiers', [])])
        grants.setdefault(admin.enrollment(g['enrollment']), []).append(
            Grant(ticket, [parse_modifier(m) for m in g.get('modifiers', [])]))
    negotiate_agreement(admin, producer, grants)
    _save_center(config, center, clearance)
    _emit(config, f"{org} -> {center}: {len(document['grants'])} grant(s) registered",
          {'org': org, 'center': center, 'grants': len(document['grants'])})


@main.command()
@click.argument('server')
@click.argument('center')
@click.argument('entries', nargs=-1, required=True)
@click.option('--kind', type=click.Choice([k.value for k in ResourceKind]), default='echo',
              show_default=True, help='Kind of the resources named by the entries.')
@click.option('--cost', default='1', show_default=True, help='Debit amount per use.')
@click.option('--content', default='', help='Content served by fetch resources.')
@click.pass_obj
@_exit_codes
def acl(config: CliConfig, server: str, center: str, entries: Tuple[str, ...], kind: str,
        cost: str, content: str) -> None:
    """
    Adds ENTRIES, each TICKET=RESOURCE, to the ACL of SERVER and registers the
    server at CENTER, whose tickets the entries name.
    """
    server_identity = _identity(config, server, Role.SERVER)
    center_identity = _identity(config, center, Role.CENTER)
    clearance = _center(config, center_identity)
    producer = ProducerAdmin(clearance)
    acl_path = config.path(server, _ACL)
    loaded = canonical_decode(_read_bytes(acl_path), LoadAcl).entries \
        if acl_path.exists() else frozenset()
    resources_path = config.path(server, _RESOURCES)
    resources: Dict[str, Any] = _read_json(resources_path) if resources_path.exists() else {}
    quantity = normalize_quantity(int(cost) if cost.isdigit() else cost)
    added = []
    for ticket_name, resource in _parse_pairs(entries, 'entries'):
        ticket = producer.ticket(ticket_name)
        added.append(AclEntry(ticket.token, _resource(server_identity.node, resource)))
        resources[resource] = {'kind': kind, 'content': content, 'cost': str(quantity)}
    _write_bytes(acl_path, canonical_encode(LoadAcl(set(loaded) | set(added))))
    _write_json(resources_path, resources)
    clearance.register_server(server_identity.node, server_identity.keys.public)
    _save_center(config, center, clearance)
    _emit(config, f"{server}: {len(added)} entr{'y' if len(added) == 1 else 'ies'} added",
          {'server': server, 'center': center, 'added': len(added)})


def _resource(server: uuid.UUID, name: str) -> Token:
    return Token(server, name.encode('utf-8'), label=name)


@main.command()
@click.argument('user')
@click.argument('server')
@click.argument('resource')
@click.option('--center', required=True, help='Clearance center SERVER relies on.')
@click.option('-p', '--param', 'params', multiple=True, help='KEY=VALUE, repeatable.')
@click.option('--now', type=int, default=0, show_default=True)
@click.option('--confirm/--no-confirm', default=False, help='Approve debit confirmations.')
@click.option('--transcript', 'transcript_path', type=click.Path(path_type=Path),
              default=None, help='Where to write the transcript.')
@click.pass_obj
@_exit_codes
def request(config: CliConfig, user: str, server: str, resource: str, center: str,
            params: Tuple[str, ...], now: int, confirm: bool,
            transcript_path: Optional[Path]) -> None:
    """
    Performs one transaction of USER against SERVER, then persists the clearance
    center's ledger and the transcript.
    """
    ephemeral = load_keypair(config.path(user, _EPHEMERAL))
    if not isinstance(ephemeral, EphemeralKeyPair):
        raise MalformedError(f"{user} holds no ephemeral key")
    issued = canonical_decode(_read_bytes(config.path(user, _CERTIFICATE)), IssueEnrollment)
    server_identity = _identity(config, server, Role.SERVER)
    center_identity = _identity(config, center, Role.CENTER)

    net = Network(SimClock(now))
    clearance = _center(config, center_identity)
    net.attach(clearance, center)
    node = ResourceServer(server_identity.node, server_identity.keys, center_identity.node,
                          clearance.public_key, net, config.rng(f"server:{server}"))
    resources_path = config.path(server, _RESOURCES)
    for name, spec in (_read_json(resources_path) if resources_path.exists() else {}).items():
        node.add_resource(_resource(node.id, name), ResourceSpec(
            ResourceKind(spec['kind']), spec.get('content', '').encode('utf-8'),
            normalize_quantity(spec.get('cost', 1))))
    acl_path = config.path(server, _ACL)
    if acl_path.exists():
        node.load_acl(canonical_decode(_read_bytes(acl_path), LoadAcl))
    net.attach(node, server)

    rng = config.rng(f"agent:{user}")
    agent = UserAgent(uuid.UUID(bytes=rng.token_bytes(16), version=4), rng,
                      scheme=ephemeral.scheme)
    agent.store(HeldCertificate(org=issued.certificate.body().org, issued=issued,
                                ephemeral=ephemeral, admin=None, user_ref=user))
    agent.learn_server(node.id, node.public_key, clearance.id, clearance.public_key)
    net.attach(agent, user)

    try:
        answer = agent.request_service(
            net, node.id, _resource(node.id, resource),
            {k.encode('utf-8'): v.encode('utf-8') for k, v in _parse_pairs(params, 'param')},
            now, approve if confirm else decline)
    finally:
        _save_center(config, center, clearance)
        _write_bytes(transcript_path or config.path(user, _TRANSCRIPT),
                     net.transcript.encode())
    _emit(config, answer.decode('utf-8', 'replace'),
          {'answer': answer.decode('utf-8', 'replace'), 'messages': len(net.transcript),
           'transcript_sha256': net.transcript.digest()})


def _load(config: CliConfig, scenario: Path) -> Tuple[Dict[str, Any], Scheme]:
    document = load_scenario(scenario)
    requested = Scheme.MARKER if document.get('backend') == 'marker' else None
    return document, config.scheme(requested)


@main.command()
@click.argument('scenario', type=click.Path(dir_okay=False, path_type=Path))
@click.option('--report', 'report_path', type=click.Path(dir_okay=False, path_type=Path),
              default=None, help='Where to write the JSON report.')
@click.option('--transcript', 'transcript_path', type=click.Path(path_type=Path),
              default=None, help='Where to write the transcript.')
@click.pass_context
@_exit_codes
def run(ctx: click.Context, scenario: Path, report_path: Optional[Path],
        transcript_path: Optional[Path]) -> None:
    """ Runs SCENARIO. Exits 0 iff every expected outcome matched. """
    config: CliConfig = ctx.obj
    document, scheme = _load(config, scenario)
    seed = config.seed if _seed_given(ctx) else None
    report = run_scenario(document, seed=seed, scheme=scheme)
    if transcript_path is not None:
        _write_bytes(transcript_path, report.transcript.encode())
    _report(config, report, report_path)
    if not report.ok:
        for step in report.mismatches():
            click.echo(f"step {step.index} ({step.action}): expected {step.expected},"
                       f" got {step.outcome}", err=True)
        for leak in report.leaks or []:
            click.echo(f"leak: {leak}", err=True)
        sys.exit(EXIT_MISMATCH)


@main.command()
@click.argument('scenario', type=click.Path(dir_okay=False, path_type=Path))
@click.option('--attack', 'attack_name', type=click.Choice([a.value for a in Attack]),
              required=True)
@click.option('--report', 'report_path', type=click.Path(dir_okay=False, path_type=Path),
              default=None)
@click.pass_context
@_exit_codes
def attack(ctx: click.Context, scenario: Path, attack_name: str,
           report_path: Optional[Path]) -> None:
    """ Runs SCENARIO with an attack drill. Exits 0 iff every attack was denied. """
    config: CliConfig = ctx.obj
    document, scheme = _load(config, scenario)
    drilled = with_attack(document, Attack(attack_name))
    report = run_scenario(drilled, seed=config.seed if _seed_given(ctx) else None,
                          scheme=scheme)
    _report(config, report, report_path)
    if not report.attacks_denied:
        for step in report.steps:
            if step.attack and not step.matched:
                click.echo(f"step {step.index}: attack not denied ({step.outcome})",
                           err=True)
        sys.exit(EXIT_MISMATCH)


def _seed_given(ctx: click.Context) -> bool:
    parent = ctx.parent
    if parent is None:
        return False
    source = parent.get_parameter_source('seed')
    return source is not None and source is not ParameterSource.DEFAULT


@main.command()
@click.argument('transcript', type=click.Path(dir_okay=False, path_type=Path))
@click.pass_obj
@_exit_codes
def inspect(config: CliConfig, transcript: Path) -> None:
    """
    Lists the messages of TRANSCRIPT. Marker seals are shown with the span they
    cover and the fingerprint of their recipient.
    """
    entries = Transcript.decode(_read_bytes(transcript))
    records = []
    for entry in entries:
        records.append({
            'seq': entry.seq,
            'time': entry.time,
            'src': str(entry.src),
            'dst': str(entry.dst),
            'type': message_kind(entry.data) if entry.data else 'Empty',
            'size': len(entry.data),
            'piggyback': message_kind(entry.piggyback) if entry.piggyback else None,
            'sealed': [{'start': r.start, 'end': r.end, 'recipient': r.recipient.hex()[:16]}
                       for r in find_regions(entry.data)],
        })
    if config.json:
        for record in records:
            click.echo(json.dumps(record, sort_keys=True))
        return
    for record in records:
        piggyback = f" +{record['piggyback']}" if record['piggyback'] else ''
        click.echo(f"#{record['seq']:<4} t={record['time']:<10} {record['src'][:8]} ->"
                   f" {record['dst'][:8]} {record['type']:<20} {record['size']:>6}B{piggyback}")
        for region in record['sealed']:
            click.echo(f"      sealed [{region['start']}, {region['end']})"
                       f" to {region['recipient']}")


if __name__ == '__main__':  # pragma: no cover
    main()
