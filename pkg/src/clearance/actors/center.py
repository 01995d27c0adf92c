"""
The clearance center C: it converts verified enrollments into tickets according
to the service agreements registered by the producer, and keeps the debit
ledger.
"""
from __future__ import annotations

import threading
import uuid
from contextlib import contextmanager
from decimal import Decimal
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Tuple, Union

from typing_extensions import final

from .._internal import API
from .._internal.log import get_logger, short_hex
from .._internal.rng import Rng
from .._internal.utils import FinalImmutable, ValueObject
from ..core.exceptions import FailureCode, MalformedError, ProtocolFailure
from ..core.modifiers import (compose_modifiers, covers, Debit, Layer, Modifier, ModifierSet,
                              normalize_quantity, Quantity, Verdict)
from ..core.tokens import (agreement_lookup, Enrollment, enrollment_closure, ImplicationMap,
                           OrgId, ServerId, ServiceAgreement, Token)
from ..envelope.codec import (canonical_decode, canonical_encode, INT, MapOf, QUANTITY,
                              register, SortedOf, UUID, ValueOf)
from ..envelope.crypto import KeyPair, PublicKey, verify
from ..protocol.messages import (build_clearance_response, build_debit_result,
                                 ClearanceBlob, ClearanceOutcome, ClearanceRequest, DebitCommit,
                                 DebitResultBody, digest, Failure,
                                 open_clearance_blob, parse_clearance_request,
                                 parse_debit_commit, RegisterAgreement, RegisterServer,
                                 TicketGrant)
from ..protocol.wire import message_type

logger = get_logger(__name__)

DEFAULT_CORRELATOR_TIMEOUT = 120
CORRELATOR_SIZE = 16

# (enrollment, ticket token, index among the ticket and agreement debits)
LedgerKey = Tuple[Enrollment, Token, int]
LEDGER_LAYERS = frozenset({Layer.TICKET, Layer.AGREEMENT})


@API.public
@final
class ClearanceConfig(FinalImmutable):
    __slots__ = ('correlator_timeout',)
    correlator_timeout: int

    def __init__(self, correlator_timeout: int = DEFAULT_CORRELATOR_TIMEOUT) -> None:
        if correlator_timeout <= 0:
            raise ValueError("correlator_timeout must be positive")
        super().__init__(correlator_timeout=correlator_timeout)


@API.public
@final
class OrgRecord(ValueObject):
    """ Everything C knows about a consuming organization. """
    __slots__ = ('org_key', 'implications', 'agreement')
    org_key: PublicKey
    implications: ImplicationMap
    agreement: ServiceAgreement


@API.private
@final
class LedgerEntry(ValueObject):
    __slots__ = ('enrollment', 'ticket', 'index', 'remaining')
    enrollment: Enrollment
    ticket: Token
    index: int
    remaining: Quantity

    @property
    def key(self) -> LedgerKey:
        return self.enrollment, self.ticket, self.index


@API.private
@final
class PendingDebit(ValueObject):
    """
    Transaction waiting for the server's commit: which ledger entries it debits
    and for which server.
    """
    __slots__ = ('correlator', 'server', 'enrollment', 'ticket', 'indices', 'created_at')
    correlator: Token
    server: ServerId
    enrollment: Enrollment
    ticket: Token
    indices: Tuple[int, ...]
    created_at: int

    def __init__(self, correlator: Token, server: ServerId, enrollment: Enrollment,
                 ticket: Token, indices: Iterable[int], created_at: int) -> None:
        super().__init__(correlator=correlator, server=server, enrollment=enrollment,
                         ticket=ticket, indices=tuple(sorted(indices)), created_at=created_at)

    def keys(self) -> List[LedgerKey]:
        return [(self.enrollment, self.ticket, i) for i in self.indices]


@API.private
@final
class CenterState(ValueObject):
    """ Persistent state of a clearance center, keys excluded. """
    __slots__ = ('center', 'orgs', 'servers', 'ledger', 'correlators')
    center: uuid.UUID
    orgs: Mapping[OrgId, OrgRecord]
    servers: Mapping[ServerId, PublicKey]
    ledger: FrozenSet[LedgerEntry]
    correlators: FrozenSet[PendingDebit]

    def __init__(self, center: uuid.UUID, orgs: Mapping[OrgId, OrgRecord],
                 servers: Mapping[ServerId, PublicKey], ledger: Iterable[LedgerEntry],
                 correlators: Iterable[PendingDebit]) -> None:
        super().__init__(center=center, orgs=dict(orgs), servers=dict(servers),
                         ledger=frozenset(ledger), correlators=frozenset(correlators))

    def _key(self) -> Tuple[object, ...]:
        return (self.center, frozenset(self.orgs.items()), frozenset(self.servers.items()),
                self.ledger, self.correlators)


register(OrgRecord, 0x60, [('org_key', ValueOf(PublicKey)),
                           ('implications', ValueOf(ImplicationMap)),
                           ('agreement', ValueOf(ServiceAgreement))])
register(LedgerEntry, 0x61, [('enrollment', ValueOf(Enrollment)), ('ticket', ValueOf(Token)),
                             ('index', INT), ('remaining', QUANTITY)])
register(PendingDebit, 0x62, [('correlator', ValueOf(Token)), ('server', UUID),
                              ('enrollment', ValueOf(Enrollment)), ('ticket', ValueOf(Token)),
                              ('indices', SortedOf(INT)), ('created_at', INT)])
register(CenterState, 0x63, [('center', UUID), ('orgs', MapOf(UUID, ValueOf(OrgRecord))),
                             ('servers', MapOf(UUID, ValueOf(PublicKey))),
                             ('ledger', SortedOf(ValueOf(LedgerEntry))),
                             ('correlators', SortedOf(ValueOf(PendingDebit)))])


def _subtract(remaining: Quantity, amount: Quantity) -> Quantity:
    if isinstance(remaining, int):
        return int(remaining - amount)
    return normalize_quantity(remaining - Decimal(amount))


@API.private
@final
class Decision(FinalImmutable):
    """ Outcome of the verification pipeline before it is signed. """
    __slots__ = ('grant', 'failure')
    grant: Optional[TicketGrant]
    failure: Optional[Failure]


@API.public
class ClearanceCenter:
    """
    Registries, agreements and debit ledger of one clearance center.

    Registrations replace whole snapshots under the lock, so a clearance running
    concurrently sees either the old or the new agreement, never a mix. Ledger
    updates and correlator consumption happen under the same lock.
    """

    def __init__(self,
                 center_id: uuid.UUID,
                 keys: KeyPair,
                 rng: Rng,
                 config: Optional[ClearanceConfig] = None) -> None:
        self.__id = center_id
        self.__keys = keys
        self.__rng = rng
        self.config = config or ClearanceConfig()
        self.__lock = threading.RLock()
        self.__orgs: Dict[OrgId, OrgRecord] = {}
        self.__servers: Dict[ServerId, PublicKey] = {}
        self.__ledger: Dict[LedgerKey, Quantity] = {}
        self.__correlators: Dict[Token, PendingDebit] = {}

    def __repr__(self) -> str:
        return (f"ClearanceCenter(id={self.__id}, orgs={len(self.__orgs)}, "
                f"servers={len(self.__servers)})")

    @property
    def id(self) -> uuid.UUID:
        return self.__id

    @property
    def public_key(self) -> PublicKey:
        return self.__keys.public

    @contextmanager
    def locked(self) -> Iterator[None]:
        with self.__lock:
            yield

    ################
    # Registration #
    ################

    def register_agreement(self,
                           org: OrgId,
                           org_key: PublicKey,
                           implications: ImplicationMap,
                           agreement: ServiceAgreement) -> None:
        """
        Registers or replaces the maps of :code:`org`. The next clearance uses them.
        Budgets of the organization restart from the registered debits.
        """
        if agreement.consumer_org != org:
            raise ValueError("Agreement registered for another organization")
        record = OrgRecord(org_key, implications, agreement)
        with self.__lock:
            self.__orgs[org] = record
            self.__ledger = {k: v for k, v in self.__ledger.items() if k[0].org != org}
            self.__correlators = {c: p for c, p in self.__correlators.items()
                                  if p.enrollment.org != org}
        logger.info("clearance.agreement_registered", org=str(org),
                    grants=sum(len(g) for g in agreement.grants.values()),
                    implications=len(implications))

    def register_server(self, server: ServerId, server_key: PublicKey) -> None:
        with self.__lock:
            self.__servers[server] = server_key
        logger.info("clearance.server_registered", server=str(server))

    def handle_admin(self, message: Union[RegisterAgreement, RegisterServer]) -> None:
        if isinstance(message, RegisterAgreement):
            self.register_agreement(message.org, message.org_key, message.implications,
                                    message.agreement)
        elif isinstance(message, RegisterServer):
            self.register_server(message.server, message.server_key)
        else:
            raise TypeError(f"Unsupported administrative message {type(message)}")

    def org(self, org: OrgId) -> Optional[OrgRecord]:
        with self.__lock:
            return self.__orgs.get(org)

    def servers(self) -> Dict[ServerId, PublicKey]:
        with self.__lock:
            return dict(self.__servers)

    #############
    # Clearance #
    #############

    def clear(self, request: Union[bytes, ClearanceRequest], now: int) -> bytes:
        """
        Decides a clearance request and returns the response for the server, signed
        by C and sealed to the server.

        Raises:
            ProtocolFailure: when the request cannot be attributed to a registered
                server (unreadable, unknown server or bad server signature). No
                response can be sealed then.
        """
        data = request if isinstance(request, bytes) else canonical_encode(request)
        request_digest = digest(data)
        servers = self.servers()
        body = parse_clearance_request(self.__keys, servers, data)
        decision = self.decide(body.server, body.clearance, body.candidates, now,
                               request_digest)
        outcome = ClearanceOutcome(decision.grant, decision.failure, request_digest)
        response = build_clearance_response(self.__keys, self.__id, servers[body.server],
                                            outcome, self.__rng, body.server)
        return canonical_encode(response)

    def decide(self,
               server: ServerId,
               clearance: ClearanceBlob,
               candidates: FrozenSet[Token],
               now: int,
               request_digest: bytes = b'') -> Decision:
        try:
            grant = self.__verify_and_grant(server, clearance, candidates, now,
                                            request_digest)
        except ProtocolFailure as e:
            logger.info("clearance.denied", server=str(server), code=e.code.display_name)
            return Decision(grant=None, failure=Failure.of(e))
        logger.info("clearance.granted", server=str(server),
                    ticket=short_hex(grant.ticket.token.value),
                    debit=grant.correlator is not None)
        return Decision(grant=grant, failure=None)

    def __verify_and_grant(self,
                           server: ServerId,
                           clearance: ClearanceBlob,
                           candidates: FrozenSet[Token],
                           now: int,
                           request_digest: bytes) -> TicketGrant:
        ephemeral_key, signed_claim, claim = open_clearance_blob(self.__keys, clearance)
        if not verify(ephemeral_key, signed_claim):
            raise ProtocolFailure(FailureCode.BAD_SIGNATURE, "Claim signature")

        record = self.org(claim.org)
        if record is None:
            raise ProtocolFailure(FailureCode.UNKNOWN_ORG)
        if not claim.certificate.verify(record.org_key):
            raise ProtocolFailure(FailureCode.BAD_SIGNATURE, "Certificate signature")
        certificate = claim.certificate.body()
        if certificate.org != claim.org:
            raise ProtocolFailure(FailureCode.BAD_SIGNATURE, "Certificate of another org")
        if certificate.ephemeral_key != ephemeral_key:
            raise ProtocolFailure(FailureCode.BAD_SIGNATURE, "Certificate of another key")
        if now > certificate.expiry:
            raise ProtocolFailure(FailureCode.EXPIRED)

        closed = enrollment_closure(certificate.enrollments, record.implications)
        match = agreement_lookup(record.agreement, closed, candidates)
        if match is None:
            raise ProtocolFailure(FailureCode.NOT_AUTHORIZED)

        composite = compose_modifiers(enrollment=certificate.modifiers,
                                      ticket=match.ticket.modifiers,
                                      agreement=match.modifiers)
        with self.__lock:
            composite, indices = self.__with_ledger(composite, match.enrollment,
                                                    match.ticket.token)
            evaluation = composite.evaluate_partial(now)
            if evaluation.verdict is Verdict.FAIL:
                code = (FailureCode.DEBIT_EXHAUSTED if evaluation.debit_failed
                        else FailureCode.MODIFIER_DENIED)
                raise ProtocolFailure(code, evaluation.describe())
            correlator: Optional[Token] = None
            if indices:
                correlator = Token(self.__id, self.__rng.token_bytes(CORRELATOR_SIZE))
                self.__correlators[correlator] = PendingDebit(
                    correlator, server, match.enrollment, match.ticket.token, indices, now)

        return TicketGrant(match.ticket, composite.modifiers(), ephemeral_key, correlator,
                           request_digest)

    def __with_ledger(self, composite: ModifierSet, enrollment: Enrollment, ticket: Token
                      ) -> Tuple[ModifierSet, List[int]]:
        """
        Replaces every debit of the composite by its ledger value, creating the
        ledger entries on first use. A debit is identified by its position among
        the debits of the ticket and agreement layers, which every holder of the
        enrollment shares.
        """
        members: List[Tuple[Layer, Modifier]] = []
        indices: List[int] = []
        for layer, modifier in composite.members:
            if isinstance(modifier, Debit):
                if layer not in LEDGER_LAYERS:
                    raise ProtocolFailure(FailureCode.MALFORMED, f"Debit in {layer.value} layer")
                index = len(indices)
                remaining = self.__ledger.setdefault((enrollment, ticket, index),
                                                     modifier.remaining)
                modifier = modifier.with_remaining(remaining)
                indices.append(index)
            members.append((layer, modifier))
        return ModifierSet(members), indices

    #########
    # Debit #
    #########

    def debit_commit(self,
                     correlator: Token,
                     amount: Quantity,
                     now: int,
                     *,
                     server: Optional[ServerId] = None,
                     ticket: Optional[Token] = None) -> DebitResultBody:
        """
        Charges :code:`amount` to every ledger entry of the transaction, all or
        nothing. A correlator is consumed by a successful commit only.
        """
        try:
            amount = normalize_quantity(amount)
        except (TypeError, ValueError) as e:
            return DebitResultBody(correlator, Failure(FailureCode.MALFORMED, str(e)))
        with self.__lock:
            pending = self.__correlators.get(correlator)
            failure: Optional[Failure] = None
            if amount <= 0:
                failure = Failure(FailureCode.MALFORMED, "Non positive amount")
            elif pending is None:
                failure = Failure(FailureCode.MALFORMED, "Unknown correlator")
            elif now - pending.created_at > self.config.correlator_timeout:
                del self.__correlators[correlator]
                failure = Failure(FailureCode.MALFORMED, "Expired correlator")
            elif (server is not None and server != pending.server) \
                    or (ticket is not None and ticket != pending.ticket):
                failure = Failure(FailureCode.MALFORMED, "Correlator of another transaction")
            else:
                keys = pending.keys()
                if not all(covers(self.__ledger[k], amount) for k in keys):
                    failure = Failure(FailureCode.DEBIT_EXHAUSTED)
                else:
                    for k in keys:
                        self.__ledger[k] = _subtract(self.__ledger[k], amount)
                    del self.__correlators[correlator]

        if failure is None:
            logger.info("clearance.debit_committed", correlator=short_hex(correlator.value),
                        amount=str(amount))
        else:
            logger.info("clearance.debit_refused", correlator=short_hex(correlator.value),
                        code=failure.code.display_name)
        return DebitResultBody(correlator, failure)

    def handle_debit_commit(self, commit: Union[bytes, DebitCommit], now: int) -> bytes:
        servers = self.servers()
        body = parse_debit_commit(self.__keys, servers, commit)
        result = self.debit_commit(body.correlator, body.amount, now,
                                   server=body.server, ticket=body.ticket)
        return canonical_encode(build_debit_result(self.__keys, servers[body.server],
                                                   result, self.__rng))

    def correlator_gc(self, now: int) -> int:
        """ Forgets transactions older than the timeout, returns how many. """
        timeout = self.config.correlator_timeout
        with self.__lock:
            expired = [c for c, p in self.__correlators.items()
                       if now - p.created_at > timeout]
            for c in expired:
                del self.__correlators[c]
        if expired:
            logger.debug("clearance.correlators_collected", count=len(expired))
        return len(expired)

    def remaining(self, enrollment: Enrollment, ticket: Token, index: int
                  ) -> Optional[Quantity]:
        with self.__lock:
            return self.__ledger.get((enrollment, ticket, index))

    def ledger(self) -> Dict[LedgerKey, Quantity]:
        with self.__lock:
            return dict(self.__ledger)

    def pending(self) -> Dict[Token, PendingDebit]:
        with self.__lock:
            return dict(self.__correlators)

    ########
    # Wire #
    ########

    def receive(self, src: uuid.UUID, data: bytes, now: int) -> bytes:
        """
        Entry point of the network. Requests that cannot be attributed to a
        registered server get an unsigned failure.
        """
        try:
            if message_type(data) is ClearanceRequest:
                return self.clear(data, now)
            return self.handle_debit_commit(data, now)
        except ProtocolFailure as e:
            logger.info("clearance.unattributable", src=str(src), code=e.code.display_name)
            return canonical_encode(Failure.of(e))

    ###############
    # Persistence #
    ###############

    def dump_state(self) -> bytes:
        with self.__lock:
            state = CenterState(
                self.__id,
                self.__orgs,
                self.__servers,
                [LedgerEntry(e, t, i, v) for (e, t, i), v in self.__ledger.items()],
                self.__correlators.values())
        return canonical_encode(state)

    def load_state(self, data: bytes) -> None:
        state = canonical_decode(data, CenterState)
        if state.center != self.__id:
            raise MalformedError("State of another clearance center")
        with self.__lock:
            self.__orgs = dict(state.orgs)
            self.__servers = dict(state.servers)
            self.__ledger = {entry.key: entry.remaining for entry in state.ledger}
            self.__correlators = {p.correlator: p for p in state.correlators}
