"""
The resource server S: ACL, replay cache, delegation of the clearance decision to
C, final modifier evaluation, debit confirmation and resource dispatch.
"""
from __future__ import annotations

import enum
import threading
import uuid
from contextlib import contextmanager
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Tuple, Union

from typing_extensions import final

from .transport import Transport
from .._internal import API
from .._internal.log import get_logger, short_hex
from .._internal.rng import Rng
from .._internal.utils import FinalImmutable
from ..core.exceptions import FailureCode, MalformedError, ProtocolFailure
from ..core.modifiers import (compose_modifiers, Debit, EvalContext, Modifier,
                              normalize_quantity, Quantity, Verdict)
from ..core.tokens import ServerId, Token
from ..envelope.codec import BYTES, canonical_decode, canonical_encode, MapOf
from ..envelope.crypto import KeyPair, PublicKey
from ..protocol.messages import (AclEntry, build_answer, build_clearance_request,
                                 build_confirm_ask, build_debit_commit, build_failure_reply,
                                 ClearanceOutcome, ClearanceResponse, ConfirmAskBody,
                                 DebitResult, digest, Failure, LoadAcl,
                                 parse_clearance_response, parse_confirm_reply,
                                 parse_debit_result, parse_request, ParsedRequest,
                                 ServerReply, Tau, TicketGrant, verify_tau)

logger = get_logger(__name__)

DEFAULT_REPLAY_WINDOW = 300

_PARAMS = MapOf(BYTES, BYTES)


@API.public
@final
class ServerConfig(FinalImmutable):
    __slots__ = ('replay_window',)
    replay_window: int

    def __init__(self, replay_window: int = DEFAULT_REPLAY_WINDOW) -> None:
        if replay_window < 0:
            raise ValueError("replay_window cannot be negative")
        super().__init__(replay_window=replay_window)


@API.public
class ResourceKind(enum.Enum):
    ECHO = 'echo'
    COUNTER = 'counter'
    FETCH = 'fetch'


@API.public
@final
class ResourceSpec(FinalImmutable):
    """
    Built-in resource. :code:`cost` is what one use debits, :code:`content` the
    document returned by a fetch.
    """
    __slots__ = ('kind', 'content', 'cost')
    kind: ResourceKind
    content: bytes
    cost: Quantity

    def __init__(self, kind: ResourceKind, content: bytes = b'', cost: Quantity = 1) -> None:
        cost = normalize_quantity(cost)
        if cost <= 0:
            raise ValueError("A resource costs a positive amount")
        super().__init__(kind=kind, content=content, cost=cost)


@API.public
class ReplayCache:
    """
    Nonces accepted within the window. Checking and inserting a nonce is one step
    under the lock, and entries outside the window are evicted on every check.

    .. doctest:: actors_server_replay

        >>> from clearance.actors import ReplayCache
        >>> from clearance.protocol import Tau
        >>> cache = ReplayCache(window=300)
        >>> tau = Tau(1000, bytes(16))
        >>> cache.check(tau, now=1000)
        True
        >>> cache.check(tau, now=1001)
        False
        >>> cache.check(Tau(600, bytes(range(16))), now=1000)
        False
    """

    def __init__(self, window: int = DEFAULT_REPLAY_WINDOW) -> None:
        self.window = window
        self.__entries: Dict[bytes, int] = {}
        self.__lock = threading.Lock()

    def __repr__(self) -> str:
        return f"ReplayCache(window={self.window}, size={len(self)})"

    def __len__(self) -> int:
        return len(self.__entries)

    def check(self, tau: Tau, now: int) -> bool:
        with self.__lock:
            self.__evict(now)
            if abs(now - tau.timestamp) > self.window or tau.nonce in self.__entries:
                return False
            self.__entries[tau.nonce] = tau.timestamp
            return True

    def evict(self, now: int) -> None:
        with self.__lock:
            self.__evict(now)

    def __evict(self, now: int) -> None:
        # A nonce is kept as long as its timestamp could still pass the window test.
        stale = [n for n, ts in self.__entries.items() if now - ts > self.window]
        for nonce in stale:
            del self.__entries[nonce]

    def timestamps(self) -> List[int]:
        with self.__lock:
            return list(self.__entries.values())


# ticket token -> resource token -> server modifiers
Acl = Mapping[Token, Mapping[Token, Tuple[Modifier, ...]]]


@API.public
class ResourceServer:
    """
    Serves users it knows nothing about: it only learns from C which ticket the
    anonymous requester holds and the ephemeral key it must answer to.
    """

    def __init__(self,
                 server_id: ServerId,
                 keys: KeyPair,
                 clearance_id: uuid.UUID,
                 clearance_key: PublicKey,
                 transport: Transport,
                 rng: Rng,
                 resources: Optional[Mapping[Token, ResourceSpec]] = None,
                 config: Optional[ServerConfig] = None) -> None:
        self.__id = server_id
        self.__keys = keys
        self.clearance_id = clearance_id
        self.clearance_key = clearance_key
        self.__transport = transport
        self.__rng = rng
        self.config = config or ServerConfig()
        self.replay = ReplayCache(self.config.replay_window)
        self.__lock = threading.RLock()
        self.__resources: Dict[Token, ResourceSpec] = dict(resources or {})
        self.__counters: Dict[Token, int] = {}
        self.__acl: Dict[Token, Dict[Token, Tuple[Modifier, ...]]] = {}

    def __repr__(self) -> str:
        return f"ResourceServer(id={self.__id}, resources={len(self.__resources)})"

    @property
    def id(self) -> ServerId:
        return self.__id

    @property
    def public_key(self) -> PublicKey:
        return self.__keys.public

    @contextmanager
    def locked(self) -> Iterator[None]:
        with self.__lock:
            yield

    #######
    # ACL #
    #######

    def load_acl(self, entries: Union[LoadAcl, Iterable[AclEntry]]) -> None:
        """
        Adds the entries, replacing the modifiers of an already present
        (ticket, resource) pair. Debits belong to C and are refused here.
        """
        if isinstance(entries, LoadAcl):
            entries = entries.entries
        entries = list(entries)
        for entry in entries:
            if any(isinstance(m, Debit) for m in entry.modifiers):
                raise ValueError("Server modifiers cannot debit, debits are kept by C")
        with self.__lock:
            acl = {t: dict(r) for t, r in self.__acl.items()}
            for entry in entries:
                acl.setdefault(entry.ticket, {})[entry.resource] = entry.modifiers
            self.__acl = acl
        logger.info("server.acl_loaded", server=str(self.__id), entries=len(entries))

    def unload_acl(self, ticket: Token, resource: Optional[Token] = None) -> None:
        """ Removes :code:`ticket` entirely, or only its privilege on :code:`resource`. """
        with self.__lock:
            acl = {t: dict(r) for t, r in self.__acl.items()}
            if resource is None:
                acl.pop(ticket, None)
            elif ticket in acl:
                acl[ticket].pop(resource, None)
                if not acl[ticket]:
                    del acl[ticket]
            self.__acl = acl
        logger.info("server.acl_unloaded", server=str(self.__id),
                    ticket=short_hex(ticket.value))

    def acl(self) -> Acl:
        with self.__lock:
            return self.__acl

    def acl_entries(self) -> FrozenSet[AclEntry]:
        return frozenset(AclEntry(t, r, mods)
                         for t, resources in self.acl().items()
                         for r, mods in resources.items())

    def candidate_tickets(self, resource: Token) -> FrozenSet[Token]:
        return frozenset(t for t, resources in self.acl().items() if resource in resources)

    def replay_check(self, tau: Tau, now: int) -> bool:
        return self.replay.check(tau, now)

    #############
    # Resources #
    #############

    def add_resource(self, resource: Token, spec: ResourceSpec) -> None:
        with self.__lock:
            self.__resources[resource] = spec

    def resource(self, resource: Token) -> Optional[ResourceSpec]:
        with self.__lock:
            return self.__resources.get(resource)

    def counter(self, resource: Token) -> int:
        with self.__lock:
            return self.__counters.get(resource, 0)

    def dispatch(self, resource: Token, params: Mapping[bytes, bytes]) -> bytes:
        spec = self.resource(resource)
        if spec is None:
            raise ProtocolFailure(FailureCode.NOT_AUTHORIZED, "Unknown resource")
        if spec.kind is ResourceKind.ECHO:
            return _PARAMS.to_bytes(params)
        if spec.kind is ResourceKind.COUNTER:
            with self.__lock:
                value = self.__counters.get(resource, 0) + 1
                self.__counters[resource] = value
            return str(value).encode('ascii')
        return spec.content

    ############
    # Requests #
    ############

    def handle_request(self, src: uuid.UUID, envelope: bytes, now: int) -> ServerReply:
        """
        Runs the whole pipeline for one request. Failures are sealed to the user
        once its ephemeral key is known and verified, sent in the clear before.
        """
        try:
            request = parse_request(self.__keys, envelope)
        except MalformedError as e:
            return self.__deny(e)
        if not self.replay_check(request.tau, now):
            logger.info("server.replay_rejected", server=str(self.__id),
                        nonce=short_hex(request.tau.nonce))
            return self.__deny(ProtocolFailure(FailureCode.REPLAY))
        candidates = self.candidate_tickets(request.resource)
        if not candidates:
            return self.__deny(ProtocolFailure(FailureCode.NOT_AUTHORIZED, "No ticket"))

        try:
            grant = self.__clear(request, candidates)
            if not verify_tau(request, grant.ephemeral_key):
                raise ProtocolFailure(FailureCode.BAD_SIGNATURE, "Request signature")
        except ProtocolFailure as e:
            return self.__deny(e)

        try:
            answer = self.__serve(src, request, grant, candidates, now)
        except ProtocolFailure as e:
            return self.__deny(e, grant.ephemeral_key, request.tau.nonce)
        logger.info("server.served", server=str(self.__id),
                    ticket=short_hex(grant.ticket.token.value))
        return build_answer(grant.ephemeral_key, request.tau.nonce, answer, self.__rng)

    def __deny(self,
               error: ProtocolFailure,
               ephemeral_key: Optional[PublicKey] = None,
               nonce: bytes = b'') -> ServerReply:
        logger.info("server.denied", server=str(self.__id), code=error.code.display_name)
        return build_failure_reply(Failure.of(error), ephemeral_key, nonce, self.__rng)

    def __clear(self, request: ParsedRequest, candidates: FrozenSet[Token]) -> TicketGrant:
        clearance_request = canonical_encode(build_clearance_request(
            self.__keys, self.__id, request.clearance, candidates, self.clearance_key,
            self.__rng, self.clearance_id))
        reply = self.__transport.send(self.__id, self.clearance_id, clearance_request)
        outcome = self.__read_outcome(reply, digest(clearance_request))
        if outcome.failure is not None:
            outcome.failure.raise_()
        assert outcome.grant is not None
        return outcome.grant

    def __read_outcome(self, reply: bytes, request_digest: bytes) -> ClearanceOutcome:
        try:
            message = canonical_decode(reply, (ClearanceResponse, Failure))
        except MalformedError:
            raise ProtocolFailure(FailureCode.MALFORMED, "Unreadable clearance response")
        if isinstance(message, Failure):
            # unsigned: C could not attribute the request to this server
            message.raise_()
        assert isinstance(message, ClearanceResponse)
        return parse_clearance_response(self.__keys, self.clearance_key, message,
                                        request_digest)

    def __serve(self,
                src: uuid.UUID,
                request: ParsedRequest,
                grant: TicketGrant,
                candidates: FrozenSet[Token],
                now: int) -> bytes:
        ticket = grant.ticket.token
        server_modifiers = self.acl().get(ticket, {}).get(request.resource)
        spec = self.resource(request.resource)
        if ticket not in candidates or server_modifiers is None or spec is None:
            raise ProtocolFailure(FailureCode.NOT_AUTHORIZED)

        composite = compose_modifiers(agreement=grant.modifiers, server=server_modifiers)
        ctx = EvalContext(now, request.params, amount=spec.cost)
        evaluation = composite.evaluate(ctx)
        if evaluation.verdict is Verdict.FAIL:
            raise ProtocolFailure(FailureCode.DEBIT_EXHAUSTED if evaluation.debit_failed
                                  else FailureCode.MODIFIER_DENIED, evaluation.describe())
        if evaluation.verdict is Verdict.NEEDS_CONFIRMATION:
            self.__confirm(src, request, grant, evaluation.confirmations, spec.cost)
            evaluation = composite.evaluate(ctx.replace(confirm_granted=True))
            if evaluation.verdict is not Verdict.PASS:
                raise ProtocolFailure(FailureCode.MODIFIER_DENIED)

        if composite.debits():
            if grant.correlator is None:
                raise ProtocolFailure(FailureCode.MALFORMED, "Debit without correlator")
            self.__commit(grant.correlator, ticket, spec.cost)
        return self.dispatch(request.resource, request.params)

    def __confirm(self,
                  src: uuid.UUID,
                  request: ParsedRequest,
                  grant: TicketGrant,
                  debits: Tuple[Debit, ...],
                  amount: Quantity) -> None:
        units = sorted({d.unit for d in debits})
        ask = ConfirmAskBody(request.tau.nonce, ', '.join(units), amount,
                             '; '.join(d.description for d in debits if d.description))
        message = build_confirm_ask(grant.ephemeral_key, ask, self.__rng)
        reply = self.__transport.send(self.__id, src, canonical_encode(message))
        if not parse_confirm_reply(self.__keys, grant.ephemeral_key, reply,
                                   request.tau.nonce):
            raise ProtocolFailure(FailureCode.CONFIRM_REQUIRED, "Declined")

    def __commit(self, correlator: Token, ticket: Token, amount: Quantity) -> None:
        commit = build_debit_commit(self.__keys, self.__id, self.clearance_key, correlator,
                                    ticket, amount, self.__rng)
        reply = self.__transport.send(self.__id, self.clearance_id, canonical_encode(commit),
                                      piggyback=True)
        try:
            message = canonical_decode(reply, (DebitResult, Failure))
        except MalformedError:
            raise ProtocolFailure(FailureCode.MALFORMED, "Unreadable debit result")
        if isinstance(message, Failure):
            message.raise_()
        result = parse_debit_result(self.__keys, self.clearance_key, message)
        if result.correlator != correlator:
            raise ProtocolFailure(FailureCode.MALFORMED, "Result of another transaction")
        if result.failure is not None:
            result.failure.raise_()

    def receive(self, src: uuid.UUID, data: bytes, now: int) -> bytes:
        return canonical_encode(self.handle_request(src, data, now))

