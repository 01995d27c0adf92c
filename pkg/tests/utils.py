import uuid
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional

from clearance._internal.rng import SeededRng
from clearance.actors import (ClearanceCenter, ClearanceConfig, DirectTransport,
                              negotiate_agreement, OrgAdmin, ProducerAdmin, ResourceKind,
                              ResourceServer, ResourceSpec, ServerConfig, UserAgent)
from clearance.core import Enrollment, Grant, Modifier, Ticket, Token
from clearance.envelope import gen_keypair, Scheme
from clearance.protocol import AclEntry
from clearance.simnet import Network, SimClock

SCENARIOS = Path(__file__).parent / 'scenarios'


class Deployment:
    """
    One consuming organization, one clearance center and one server on the
    simulated network, all from a single seed.
    """

    def __init__(self, seed: int = 1, scheme: Scheme = Scheme.ED25519_X25519,
                 start: int = 1_000_000, correlator_timeout: int = 120,
                 replay_window: int = 300, direct: bool = False) -> None:
        self.rng = SeededRng(seed)
        self.scheme = scheme
        self.clock = SimClock(start)
        self.net = DirectTransport(start) if direct else Network(self.clock)
        self.center = ClearanceCenter(self.new_id(), self.keys(), self.rng.fork('center'),
                                      ClearanceConfig(correlator_timeout))
        self.producer = ProducerAdmin(self.center)
        self.org = OrgAdmin(self.new_id(), self.keys())
        self.server = ResourceServer(self.new_id(), self.keys(), self.center.id,
                                     self.center.public_key, self.net,
                                     self.rng.fork('server'),
                                     config=ServerConfig(replay_window))
        self.producer.register_server(self.server)
        self.attach(self.center, 'C')
        self.attach(self.server, 'S')
        self.users: Dict[str, UserAgent] = {}

    def attach(self, node, name: str) -> None:
        if isinstance(self.net, Network):
            self.net.attach(node, name)
        else:
            self.net.attach(node)

    def new_id(self) -> uuid.UUID:
        return uuid.UUID(bytes=self.rng.token_bytes(16), version=4)

    def keys(self):
        return gen_keypair(self.rng, self.scheme)

    @property
    def now(self) -> int:
        return self.clock.now

    def resource(self, name: str, kind: ResourceKind = ResourceKind.FETCH,
                 content: bytes = b'content', cost=1) -> Token:
        token = Token(self.server.id, name.encode(), label=name)
        self.server.add_resource(token, ResourceSpec(kind, content, cost))
        return token

    def ticket(self, name: str, modifiers: Iterable[Modifier] = ()) -> Ticket:
        return self.producer.ticket(name, modifiers)

    def allow(self, ticket: Ticket, resource: Token,
              modifiers: Iterable[Modifier] = ()) -> None:
        self.server.load_acl([AclEntry(ticket.token, resource, modifiers)])

    def enrollment(self, group: str) -> Enrollment:
        return self.org.enrollment(group)

    def agree(self, grants: Mapping[str, List[Grant]]) -> None:
        negotiate_agreement(self.org, self.producer,
                            {self.enrollment(g): entries for g, entries in grants.items()})

    def user(self, name: str, groups: Iterable[str], modifiers: Iterable[Modifier] = (),
             member: Optional[str] = None) -> UserAgent:
        self.org.add_member(member or name, list(groups), modifiers)
        agent = UserAgent(self.new_id(), self.rng.fork(f'user:{name}'), scheme=self.scheme)
        agent.learn_server(self.server.id, self.server.public_key, self.center.id,
                           self.center.public_key)
        agent.refresh_enrollments(self.org, member or name, self.now)
        self.attach(agent, name)
        self.users[name] = agent
        return agent

    def request(self, user: UserAgent, resource: Token,
                params: Optional[Mapping[bytes, bytes]] = None, confirm=None) -> bytes:
        kwargs = {} if confirm is None else {'confirm': confirm}
        return user.request_service(self.net, self.server.id, resource, params or {},
                                    self.now, **kwargs)


def honest(seed: int = 1, scheme: Scheme = Scheme.ED25519_X25519, **kwargs):
    """ alice, member of staff, may fetch the document through the read ticket. """
    d = Deployment(seed, scheme, **kwargs)
    doc = d.resource('doc', content=b'hello')
    read = d.ticket('read')
    d.allow(read, doc)
    d.agree({'staff': [Grant(read)]})
    alice = d.user('alice', ['staff'])
    return d, doc, read, alice
