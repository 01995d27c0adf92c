"""
Agents acting for people: the end user U, the administrator A_O of a consuming
organization and the administrator A_P of a producing organization.
"""
from __future__ import annotations

import enum
import threading
import uuid
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple, Union

from typing_extensions import final

from .center import ClearanceCenter
from .server import ResourceServer
from .transport import Transport
from .._internal import API
from .._internal.log import get_logger, short_hex
from .._internal.rng import Rng
from .._internal.utils import FinalImmutable
from ..core.exceptions import FailureCode, MalformedError, ProtocolFailure, RefusalError
from ..core.modifiers import Debit, Modifier, Quantity, sort_modifiers
from ..core.tokens import (Enrollment, Grant, ImplicationMap, OrgId, ServerId,
                           ServiceAgreement, Ticket, Token)
from ..envelope.codec import canonical_encode
from ..envelope.crypto import (DEFAULT_SCHEME, EphemeralKeyPair, gen_ephemeral, KeyPair,
                               PublicKey, Scheme)
from ..protocol.messages import (build_confirm_reply, build_request, CertificateBody,
                                 Credentials, issue_certificate, IssueEnrollment,
                                 open_confirm_ask, open_reply, RegisterAgreement,
                                 RegisterServer, Tau)

logger = get_logger(__name__)

DEFAULT_CERTIFICATE_LIFETIME = 86400

ConfirmDecision = Callable[[str, Quantity, str], bool]


@API.public
def decline(unit: str, amount: Quantity, description: str) -> bool:
    return False


@API.public
def approve(unit: str, amount: Quantity, description: str) -> bool:
    return True


@API.public
class RotationPolicy(enum.Enum):
    """ When a user agent replaces its ephemeral key pair. """
    NEVER = 'never'
    ON_REFRESH = 'on_refresh'
    EVERY_REQUEST = 'every_request'


@API.public
@final
class AgentConfig(FinalImmutable):
    __slots__ = ('rotation',)
    rotation: RotationPolicy

    def __init__(self, rotation: RotationPolicy = RotationPolicy.ON_REFRESH) -> None:
        super().__init__(rotation=rotation)


##################
# Consuming side #
##################

@API.public
class OrgAdmin:
    """
    Holds the enrollments of the members of an organization and issues them
    certificates. Members are referred to by a local name which never leaves the
    organization.
    """

    def __init__(self,
                 org_id: OrgId,
                 keys: KeyPair,
                 *,
                 implications: Optional[ImplicationMap] = None,
                 default_expiry: int = DEFAULT_CERTIFICATE_LIFETIME) -> None:
        self.__id = org_id
        self.__keys = keys
        self.implications = implications or ImplicationMap()
        self.default_expiry = default_expiry
        self.__lock = threading.RLock()
        self.__members: Dict[str, Tuple[FrozenSet[Enrollment], Tuple[Modifier, ...]]] = {}
        self.__clearance_centers: Dict[uuid.UUID, PublicKey] = {}

    def __repr__(self) -> str:
        return f"OrgAdmin(id={self.__id}, members={len(self.__members)})"

    @property
    def id(self) -> OrgId:
        return self.__id

    @property
    def public_key(self) -> PublicKey:
        return self.__keys.public

    def enrollment(self, group: Union[str, bytes]) -> Enrollment:
        """ The enrollment of this organization for a membership class. """
        name = group.encode('utf-8') if isinstance(group, str) else group
        return Enrollment(Token(self.__id, name, label=name.decode('utf-8', 'replace')), name)

    def add_member(self,
                   user_ref: str,
                   groups: Iterable[Union[str, bytes, Enrollment]],
                   modifiers: Iterable[Modifier] = ()) -> None:
        """
        Adds or replaces a member. :code:`modifiers` restrict every enrollment of
        the certificates issued to them, e.g. a validity period.
        """
        modifiers = sort_modifiers(modifiers)
        if any(isinstance(m, Debit) for m in modifiers):
            raise ValueError("Debits are granted through the service agreement")
        enrollments = frozenset(g if isinstance(g, Enrollment) else self.enrollment(g)
                                for g in groups)
        for e in enrollments:
            if e.org != self.__id:
                raise ValueError(f"{e} belongs to another organization")
        with self.__lock:
            self.__members[user_ref] = (enrollments, modifiers)

    def set_groups(self, user_ref: str, groups: Iterable[Union[str, bytes, Enrollment]]
                   ) -> None:
        with self.__lock:
            if user_ref not in self.__members:
                raise RefusalError(f"{user_ref!r} is not a member")
            self.add_member(user_ref, groups, self.__members[user_ref][1])

    def remove_member(self, user_ref: str) -> None:
        with self.__lock:
            self.__members.pop(user_ref, None)
        logger.info("org.member_removed", org=str(self.__id))

    def groups(self, user_ref: str) -> FrozenSet[Enrollment]:
        with self.__lock:
            try:
                return self.__members[user_ref][0]
            except KeyError:
                raise RefusalError(f"{user_ref!r} is not a member")

    def learn_clearance_center(self, center_id: uuid.UUID, center_key: PublicKey) -> None:
        with self.__lock:
            self.__clearance_centers[center_id] = center_key

    def clearance_centers(self) -> Dict[uuid.UUID, PublicKey]:
        with self.__lock:
            return dict(self.__clearance_centers)

    def issue_enrollment(self, user_ref: str, ephemeral_key: PublicKey, now: int
                         ) -> IssueEnrollment:
        """
        Certificate binding the enrollments of :code:`user_ref` to the ephemeral
        key it supplied, with a cleartext copy of the expiry.

        Raises:
            RefusalError: :code:`user_ref` is not a member.
        """
        with self.__lock:
            member = self.__members.get(user_ref)
        if member is None:
            raise RefusalError(f"{user_ref!r} is not a member")
        enrollments, modifiers = member
        expiry = now + self.default_expiry
        body = CertificateBody(ephemeral_key, self.__id, enrollments, expiry, modifiers)
        logger.debug("org.certificate_issued", org=str(self.__id),
                     key=short_hex(ephemeral_key.data), expiry=expiry)
        return IssueEnrollment(issue_certificate(self.__keys, body), expiry)


##################
# Producing side #
##################

@API.public
class ProducerAdmin:
    """
    Administrator of a producing organization: mints tickets at its clearance
    center and registers agreements and servers there. Calls are trusted and
    local.
    """

    def __init__(self, center: ClearanceCenter) -> None:
        self.center = center
        self.__lock = threading.RLock()
        self.__agreements: Dict[OrgId, RegisterAgreement] = {}

    def __repr__(self) -> str:
        return f"ProducerAdmin(center={self.center.id})"

    def ticket(self, name: Union[str, bytes], modifiers: Iterable[Modifier] = ()) -> Ticket:
        value = name.encode('utf-8') if isinstance(name, str) else name
        return Ticket(Token(self.center.id, value, label=value.decode('utf-8', 'replace')),
                      modifiers)

    def register(self, message: RegisterAgreement) -> Tuple[uuid.UUID, PublicKey]:
        with self.__lock:
            self.__agreements[message.org] = message
            self.center.handle_admin(message)
        return self.center.id, self.center.public_key

    def register_server(self, server: ResourceServer) -> None:
        self.center.handle_admin(RegisterServer(server.id, server.public_key))

    def agreement(self, org: OrgId) -> Optional[ServiceAgreement]:
        with self.__lock:
            message = self.__agreements.get(org)
        return None if message is None else message.agreement

    def __edit(self, org: OrgId, edit: Callable[[ServiceAgreement], ServiceAgreement]
               ) -> None:
        with self.__lock:
            message = self.__agreements.get(org)
            if message is None:
                raise RefusalError(f"No agreement with {org}")
            self.register(RegisterAgreement(message.org, message.org_key,
                                            message.implications,
                                            edit(message.agreement)))

    def revoke_grant(self, org: OrgId, enrollment: Enrollment, ticket: Token) -> None:
        self.__edit(org, lambda a: a.without(enrollment, ticket))
        logger.info("producer.grant_revoked", org=str(org), ticket=short_hex(ticket.value))

    def remove_enrollment(self, org: OrgId, enrollment: Enrollment) -> None:
        self.__edit(org, lambda a: a.without(enrollment))
        logger.info("producer.enrollment_removed", org=str(org))

    def add_grant(self, org: OrgId, enrollment: Enrollment, grant: Grant) -> None:
        self.__edit(org, lambda a: a.with_grant(enrollment, grant))


@API.public
def negotiate_agreement(org_admin: OrgAdmin,
                        producer_admin: ProducerAdmin,
                        grants: Mapping[Enrollment, Iterable[Grant]]
                        ) -> Tuple[uuid.UUID, PublicKey]:
    """
    Registers at the producer's clearance center the agreement drafted between
    the two administrators. The consuming organization learns the name and key of
    the clearance center, which it passes on to its members.
    """
    message = RegisterAgreement(org_admin.id, org_admin.public_key, org_admin.implications,
                                ServiceAgreement(org_admin.id, grants))
    center_id, center_key = producer_admin.register(message)
    org_admin.learn_clearance_center(center_id, center_key)
    return center_id, center_key


#########
# Users #
#########

@API.public
@final
class ServerContact(FinalImmutable):
    """ Public key of a server and of the clearance center it relies on. """
    __slots__ = ('server_key', 'clearance_id', 'clearance_key')
    server_key: PublicKey
    clearance_id: uuid.UUID
    clearance_key: PublicKey


@API.public
@final
class HeldCertificate(FinalImmutable):
    """
    A certificate with the ephemeral key pair it binds and the organization
    administrator able to refresh it.
    """
    __slots__ = ('org', 'issued', 'ephemeral', 'admin', 'user_ref')
    org: OrgId
    issued: IssueEnrollment
    ephemeral: EphemeralKeyPair
    admin: Optional[OrgAdmin]
    user_ref: str

    @property
    def expiry(self) -> int:
        return self.issued.expiry


@API.public
@final
class SentRequest(FinalImmutable):
    """ A request as its sender knows it. """
    __slots__ = ('server', 'server_key', 'envelope', 'tau', 'resource', 'params',
                 'ephemeral_key')
    server: ServerId
    server_key: PublicKey
    envelope: bytes
    tau: Tau
    resource: Token
    params: Mapping[bytes, bytes]
    ephemeral_key: PublicKey


@API.public
class UserAgent:
    """
    Software acting for an end user. It presents its certificates under
    ephemeral keys only, so servers never learn who it is.
    """

    def __init__(self,
                 node_id: uuid.UUID,
                 rng: Rng,
                 config: Optional[AgentConfig] = None,
                 *,
                 scheme: Scheme = DEFAULT_SCHEME) -> None:
        self.__id = node_id
        self.__rng = rng
        self.config = config or AgentConfig()
        self.scheme = scheme
        self.ephemeral = gen_ephemeral(rng, scheme)
        self.__history: List[PublicKey] = [self.ephemeral.public]
        self.__certificates: Dict[OrgId, HeldCertificate] = {}
        self.__servers: Dict[ServerId, ServerContact] = {}
        self.__pending: Optional[Tuple[EphemeralKeyPair, bytes, ConfirmDecision]] = None
        self.outbox: List[SentRequest] = []

    def __repr__(self) -> str:
        return f"UserAgent(id={self.__id}, certificates={len(self.__certificates)})"

    @property
    def id(self) -> uuid.UUID:
        return self.__id

    def rotate(self) -> EphemeralKeyPair:
        """ New ephemeral key pair for the next certificates. """
        self.ephemeral = gen_ephemeral(self.__rng, self.scheme)
        self.__history.append(self.ephemeral.public)
        logger.debug("user.rotated", key=short_hex(self.ephemeral.public.data))
        return self.ephemeral

    def ephemeral_keys(self) -> List[PublicKey]:
        """ Every ephemeral public key this agent ever used, oldest first. """
        return list(self.__history)

    def learn_server(self, server_id: ServerId, server_key: PublicKey,
                     clearance_id: uuid.UUID, clearance_key: PublicKey) -> None:
        self.__servers[server_id] = ServerContact(server_key, clearance_id, clearance_key)

    def certificates(self) -> Dict[OrgId, HeldCertificate]:
        return dict(self.__certificates)

    def store(self, held: HeldCertificate) -> None:
        self.__certificates[held.org] = held

    def refresh_enrollments(self, org_admin: OrgAdmin, user_ref: str, now: int
                            ) -> HeldCertificate:
        """
        Asks :code:`org_admin` for a certificate. Unless rotation is disabled, the
        certificate binds a freshly generated ephemeral key.

        Raises:
            RefusalError: not a member (anymore). Certificates already held stay.
        """
        ephemeral = self.ephemeral
        if self.config.rotation is not RotationPolicy.NEVER:
            ephemeral = self.rotate()
        issued = org_admin.issue_enrollment(user_ref, ephemeral.public, now)
        held = HeldCertificate(org=org_admin.id, issued=issued, ephemeral=ephemeral,
                               admin=org_admin, user_ref=user_ref)
        self.store(held)
        return held

    def __credentials_for(self, contact: ServerContact, now: int) -> Credentials:
        if not self.__certificates:
            raise ProtocolFailure(FailureCode.NOT_AUTHORIZED, "No certificate")
        held = self.__choose(contact)
        if self.config.rotation is RotationPolicy.EVERY_REQUEST and held.admin is not None:
            held = self.refresh_enrollments(held.admin, held.user_ref, now)
        return Credentials(held.ephemeral, held.org, held.issued.certificate,
                           contact.clearance_key, contact.clearance_id)

    def __choose(self, contact: ServerContact) -> HeldCertificate:
        # First organization, in id order, having an agreement with the server's C.
        ordered = sorted(self.__certificates.values(), key=lambda h: h.org.bytes)
        for held in ordered:
            if held.admin is not None \
                    and contact.clearance_id in held.admin.clearance_centers():
                return held
        return ordered[0]

    def request_service(self,
                        transport: Transport,
                        server_id: ServerId,
                        resource: Token,
                        params: Optional[Mapping[bytes, bytes]] = None,
                        now: int = 0,
                        confirm: ConfirmDecision = decline) -> bytes:
        """
        Sends one request and returns the answer. :code:`confirm` is asked
        whether to approve a debit with its unit, amount and description.

        Raises:
            ProtocolFailure: the request was denied, with its failure code.
            HarnessError: the simulated network lost the exchange.
        """
        contact = self.__servers.get(server_id)
        if contact is None:
            raise RefusalError(f"Unknown server {server_id}")
        credentials = self.__credentials_for(contact, now)
        envelope, tau = build_request(credentials, contact.server_key, resource,
                                      params or {}, now, self.__rng)
        data = canonical_encode(envelope)
        self.outbox.append(SentRequest(server_id, contact.server_key, data, tau, resource,
                                       dict(params or {}), credentials.ephemeral.public))
        self.__pending = (credentials.ephemeral, tau.nonce, confirm)
        try:
            reply = transport.send(self.__id, server_id, data)
        finally:
            self.__pending = None
        body = open_reply(credentials.ephemeral, reply)
        if body.failure is not None:
            body.failure.raise_()
        if body.nonce != tau.nonce or body.answer is None:
            raise ProtocolFailure(FailureCode.MALFORMED, "Answer to another request")
        return body.answer

    def receive(self, src: uuid.UUID, data: bytes, now: int) -> bytes:
        """
        Confirmation asks of a server while a request is in flight. Anything else
        gets an empty reply, which the sender cannot parse.
        """
        pending = self.__pending
        contact = self.__servers.get(src)
        if pending is None or contact is None:
            return b''
        ephemeral, nonce, confirm = pending
        try:
            ask = open_confirm_ask(ephemeral, data)
        except MalformedError:
            return b''
        decision = ask.nonce == nonce and confirm(ask.unit, ask.amount, ask.description)
        logger.debug("user.confirmation", decision=decision)
        reply = build_confirm_reply(ephemeral, contact.server_key, nonce, decision,
                                    self.__rng)
        return canonical_encode(reply)

