"""
Every message of the protocol, with its builder and its parser.

Nesting of a user request, from the inside out::

    certificate   = [k_U, O, E, expiry, modifiers] signed by O
    claim         = {O, certificate} signed by j_U
    clearance     = (k_U, claim) sealed to C
    request       = ({tau} signed by j_U, R, z, clearance) sealed to S

The server can open the request but not the clearance blob, so it learns the
resource and the parameters but nothing about the user's organization or
enrollments. Parsers are total: untrusted bytes either parse or raise
:py:exc:`~clearance.exceptions.MalformedError`.
"""
from __future__ import annotations

import hashlib
import uuid
from typing import (AbstractSet, FrozenSet, Iterable, Mapping, Optional, Tuple, Type,
                    TypeVar, Union)

from typing_extensions import final

from .._internal import API
from .._internal.rng import Rng
from .._internal.utils import ValueObject
from ..core.exceptions import (DecryptFailure, FailureCode, MalformedError,
                               ProtocolFailure)
from ..core.modifiers import Modifier, normalize_quantity, Quantity, sort_modifiers
from ..core.tokens import Enrollment, ImplicationMap, ServiceAgreement, Ticket, Token
from ..envelope.codec import (BOOL, BYTES, canonical_decode, canonical_encode, EnumOf, INT,
                              MapOf, Maybe, QUANTITY, register, SortedOf, STR, UUID,
                              ValueOf)
from ..envelope.crypto import (EphemeralKeyPair, KeyMaterial, KeyPair, open_sealed,
                               PublicKey, seal, SealedBlob, sign, SignedBlob, verify)
from ..envelope.layouts import MODIFIERS

V = TypeVar('V')

NONCE_SIZE = 16


###########
# Helpers #
###########

def _decode(data: bytes, expected: Type[V]) -> V:
    return canonical_decode(data, expected)


def _open(keys: KeyMaterial, blob: SealedBlob) -> bytes:
    try:
        return open_sealed(keys, blob)
    except DecryptFailure:
        raise
    except Exception as e:  # backend errors on hostile input
        raise DecryptFailure(str(e)) from e


def _signed_sealed(signer: KeyMaterial,
                   body: object,
                   recipient: PublicKey,
                   rng: Rng,
                   signer_hint: Optional[uuid.UUID] = None,
                   recipient_hint: Optional[uuid.UUID] = None) -> SealedBlob:
    signed = sign(signer, canonical_encode(body), signer_hint)
    return seal(recipient, canonical_encode(signed), rng, recipient_hint)


def _opened_signed(keys: KeyMaterial, sealed: SealedBlob) -> SignedBlob:
    return _decode(_open(keys, sealed), SignedBlob)


@API.public
def digest(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


############
# Payloads #
############

@API.public
@final
class Tau(ValueObject):
    """ Timestamp and nonce letting the server reject replays. """
    __slots__ = ('timestamp', 'nonce')
    timestamp: int
    nonce: bytes

    def __init__(self, timestamp: int, nonce: bytes) -> None:
        if len(nonce) != NONCE_SIZE:
            raise ValueError(f"A nonce is {NONCE_SIZE} bytes")
        super().__init__(timestamp=timestamp, nonce=nonce)


@API.public
@final
class CertificateBody(ValueObject):
    """
    What an organization vouches for: the holder of :code:`ephemeral_key` holds
    :code:`enrollments` until :code:`expiry`, subject to :code:`modifiers`.
    """
    __slots__ = ('ephemeral_key', 'org', 'enrollments', 'expiry', 'modifiers')
    ephemeral_key: PublicKey
    org: uuid.UUID
    enrollments: FrozenSet[Enrollment]
    expiry: int
    modifiers: Tuple[Modifier, ...]

    def __init__(self,
                 ephemeral_key: PublicKey,
                 org: uuid.UUID,
                 enrollments: Iterable[Enrollment],
                 expiry: int,
                 modifiers: Iterable[Modifier] = ()) -> None:
        enrollments = frozenset(enrollments)
        for e in enrollments:
            if e.org != org:
                raise ValueError(f"Enrollment {e} was not issued by {org}")
        super().__init__(ephemeral_key=ephemeral_key,
                         org=org,
                         enrollments=enrollments,
                         expiry=expiry,
                         modifiers=sort_modifiers(modifiers))


@API.public
@final
class EnrollmentCertificate(ValueObject):
    """ :py:class:`CertificateBody` signed with the organization's long-term key. """
    __slots__ = ('signed',)
    signed: SignedBlob

    def body(self) -> CertificateBody:
        return _decode(self.signed.payload, CertificateBody)

    def verify(self, org_key: PublicKey) -> bool:
        return verify(org_key, self.signed)


@API.public
def issue_certificate(org_keys: KeyPair, body: CertificateBody) -> EnrollmentCertificate:
    return EnrollmentCertificate(sign(org_keys, canonical_encode(body), body.org))


@API.public
@final
class Claim(ValueObject):
    """ Organization and certificate, signed by the user's ephemeral key. """
    __slots__ = ('org', 'certificate')
    org: uuid.UUID
    certificate: EnrollmentCertificate


@API.public
@final
class ClearancePayload(ValueObject):
    __slots__ = ('ephemeral_key', 'claim')
    ephemeral_key: PublicKey
    claim: SignedBlob


@API.public
@final
class ClearanceBlob(ValueObject):
    """ Sealed to the clearance center: opaque to the server. """
    __slots__ = ('sealed',)
    sealed: SealedBlob


@API.public
@final
class RequestBody(ValueObject):
    __slots__ = ('tau', 'resource', 'params', 'clearance')
    tau: SignedBlob
    resource: Token
    params: Mapping[bytes, bytes]
    clearance: ClearanceBlob

    def __init__(self, tau: SignedBlob, resource: Token, params: Mapping[bytes, bytes],
                 clearance: ClearanceBlob) -> None:
        super().__init__(tau=tau, resource=resource, params=dict(params),
                         clearance=clearance)

    def _key(self) -> Tuple[object, ...]:
        return self.tau, self.resource, frozenset(self.params.items()), self.clearance


@API.public
@final
class RequestEnvelope(ValueObject):
    """ The user's request, sealed to the server. """
    __slots__ = ('sealed',)
    sealed: SealedBlob


@API.public
@final
class ClearanceRequestBody(ValueObject):
    __slots__ = ('server', 'clearance', 'candidates')
    server: uuid.UUID
    clearance: ClearanceBlob
    candidates: FrozenSet[Token]

    def __init__(self, server: uuid.UUID, clearance: ClearanceBlob,
                 candidates: Iterable[Token]) -> None:
        super().__init__(server=server, clearance=clearance,
                         candidates=frozenset(candidates))


@API.public
@final
class ClearanceRequest(ValueObject):
    __slots__ = ('sealed',)
    sealed: SealedBlob


@API.public
@final
class Failure(ValueObject):
    __slots__ = ('code', 'detail')
    code: FailureCode
    detail: str

    def __init__(self, code: FailureCode, detail: str = '') -> None:
        super().__init__(code=code, detail=detail)

    @classmethod
    def of(cls, error: ProtocolFailure) -> Failure:
        return cls(error.code, error.detail)

    def raise_(self) -> None:
        raise ProtocolFailure(self.code, self.detail)


@API.public
@final
class TicketGrant(ValueObject):
    """
    Decision of the clearance center. :code:`modifiers` are the effective
    enrollment, ticket and agreement modifiers, with debits showing their current
    ledger value. :code:`request_digest` ties the grant to the request it answers.
    """
    __slots__ = ('ticket', 'modifiers', 'ephemeral_key', 'correlator', 'request_digest')
    ticket: Ticket
    modifiers: Tuple[Modifier, ...]
    ephemeral_key: PublicKey
    correlator: Optional[Token]
    request_digest: bytes

    def __init__(self,
                 ticket: Ticket,
                 modifiers: Iterable[Modifier],
                 ephemeral_key: PublicKey,
                 correlator: Optional[Token],
                 request_digest: bytes) -> None:
        super().__init__(ticket=ticket,
                         modifiers=tuple(modifiers),
                         ephemeral_key=ephemeral_key,
                         correlator=correlator,
                         request_digest=request_digest)


@API.public
@final
class ClearanceOutcome(ValueObject):
    """ Either a grant or a failure, signed by the clearance center. """
    __slots__ = ('grant', 'failure', 'request_digest')
    grant: Optional[TicketGrant]
    failure: Optional[Failure]
    request_digest: bytes

    def __init__(self, grant: Optional[TicketGrant], failure: Optional[Failure],
                 request_digest: bytes) -> None:
        if (grant is None) == (failure is None):
            raise ValueError("Exactly one of grant and failure")
        super().__init__(grant=grant, failure=failure, request_digest=request_digest)


@API.public
@final
class ClearanceResponse(ValueObject):
    __slots__ = ('sealed',)
    sealed: SealedBlob


@API.public
@final
class ConfirmAskBody(ValueObject):
    """
    What the user is asked to approve: unit of measure, debit amount and the
    transaction description.
    """
    __slots__ = ('nonce', 'unit', 'amount', 'description')
    nonce: bytes
    unit: str
    amount: Quantity
    description: str

    def __init__(self, nonce: bytes, unit: str, amount: Quantity, description: str
                 ) -> None:
        super().__init__(nonce=nonce, unit=unit, amount=normalize_quantity(amount),
                         description=description)


@API.public
@final
class ConfirmAsk(ValueObject):
    __slots__ = ('sealed',)
    sealed: SealedBlob


@API.public
@final
class ConfirmReplyBody(ValueObject):
    __slots__ = ('nonce', 'decision')
    nonce: bytes
    decision: bool


@API.public
@final
class ConfirmReply(ValueObject):
    __slots__ = ('sealed',)
    sealed: SealedBlob


@API.public
@final
class DebitCommitBody(ValueObject):
    __slots__ = ('server', 'correlator', 'ticket', 'amount')
    server: uuid.UUID
    correlator: Token
    ticket: Token
    amount: Quantity

    def __init__(self, server: uuid.UUID, correlator: Token, ticket: Token,
                 amount: Quantity) -> None:
        super().__init__(server=server, correlator=correlator, ticket=ticket,
                         amount=normalize_quantity(amount))


@API.public
@final
class DebitCommit(ValueObject):
    __slots__ = ('sealed',)
    sealed: SealedBlob


@API.public
@final
class DebitResultBody(ValueObject):
    """ Proceed when :code:`failure` is :py:obj:`None`. """
    __slots__ = ('correlator', 'failure')
    correlator: Token
    failure: Optional[Failure]

    @property
    def proceed(self) -> bool:
        return self.failure is None


@API.public
@final
class DebitResult(ValueObject):
    __slots__ = ('sealed',)
    sealed: SealedBlob


@API.public
@final
class AnswerBody(ValueObject):
    """
    Answer or failure for the user, bound to the nonce of the request it answers.
    """
    __slots__ = ('nonce', 'answer', 'failure')
    nonce: bytes
    answer: Optional[bytes]
    failure: Optional[Failure]


@API.public
@final
class ServerReply(ValueObject):
    """
    Reply to a request: sealed to the user's ephemeral key when the server learned
    it, otherwise a bare failure (nothing about the user is in it).
    """
    __slots__ = ('sealed', 'failure')
    sealed: Optional[SealedBlob]
    failure: Optional[Failure]


#########################
# Administrative values #
#########################

@API.public
@final
class AclEntry(ValueObject):
    """ Holders of :code:`ticket` may use :code:`resource`, subject to modifiers. """
    __slots__ = ('ticket', 'resource', 'modifiers')
    ticket: Token
    resource: Token
    modifiers: Tuple[Modifier, ...]

    def __init__(self, ticket: Token, resource: Token, modifiers: Iterable[Modifier] = ()
                 ) -> None:
        super().__init__(ticket=ticket, resource=resource,
                         modifiers=sort_modifiers(modifiers))


@API.public
@final
class LoadAcl(ValueObject):
    __slots__ = ('entries',)
    entries: FrozenSet[AclEntry]

    def __init__(self, entries: Iterable[AclEntry]) -> None:
        super().__init__(entries=frozenset(entries))


@API.public
@final
class RegisterAgreement(ValueObject):
    __slots__ = ('org', 'org_key', 'implications', 'agreement')
    org: uuid.UUID
    org_key: PublicKey
    implications: ImplicationMap
    agreement: ServiceAgreement


@API.public
@final
class RegisterServer(ValueObject):
    __slots__ = ('server', 'server_key')
    server: uuid.UUID
    server_key: PublicKey


@API.public
@final
class IssueEnrollment(ValueObject):
    """ A certificate with the cleartext copy of its expiry, for refresh scheduling. """
    __slots__ = ('certificate', 'expiry')
    certificate: EnrollmentCertificate
    expiry: int


FAILURE_CODE = EnumOf(FailureCode)
SIGNED = ValueOf(SignedBlob)
SEALED = ValueOf(SealedBlob)
PUBLIC_KEY = ValueOf(PublicKey)
TOKEN = ValueOf(Token)

register(Tau, 0x40, [('timestamp', INT), ('nonce', BYTES)])
register(CertificateBody, 0x41, [('ephemeral_key', PUBLIC_KEY), ('org', UUID),
                                 ('enrollments', SortedOf(ValueOf(Enrollment))),
                                 ('expiry', INT), ('modifiers', MODIFIERS)])
register(EnrollmentCertificate, 0x42, [('signed', SIGNED)])
register(Claim, 0x43, [('org', UUID), ('certificate', ValueOf(EnrollmentCertificate))])
register(ClearancePayload, 0x44, [('ephemeral_key', PUBLIC_KEY), ('claim', SIGNED)])
register(ClearanceBlob, 0x45, [('sealed', SEALED)])
register(RequestBody, 0x46, [('tau', SIGNED), ('resource', TOKEN),
                             ('params', MapOf(BYTES, BYTES)),
                             ('clearance', ValueOf(ClearanceBlob))])
register(RequestEnvelope, 0x47, [('sealed', SEALED)])
register(ClearanceRequestBody, 0x48, [('server', UUID), ('clearance', ValueOf(ClearanceBlob)),
                                      ('candidates', SortedOf(TOKEN))])
register(ClearanceRequest, 0x49, [('sealed', SEALED)])
register(Failure, 0x4A, [('code', FAILURE_CODE), ('detail', STR)])
register(TicketGrant, 0x4B, [('ticket', ValueOf(Ticket)), ('modifiers', MODIFIERS),
                             ('ephemeral_key', PUBLIC_KEY), ('correlator', Maybe(TOKEN)),
                             ('request_digest', BYTES)])
register(ClearanceOutcome, 0x4C, [('grant', Maybe(ValueOf(TicketGrant))),
                                  ('failure', Maybe(ValueOf(Failure))),
                                  ('request_digest', BYTES)])
register(ClearanceResponse, 0x4D, [('sealed', SEALED)])
register(ConfirmAskBody, 0x4E, [('nonce', BYTES), ('unit', STR), ('amount', QUANTITY),
                                ('description', STR)])
register(ConfirmAsk, 0x4F, [('sealed', SEALED)])
register(ConfirmReplyBody, 0x50, [('nonce', BYTES), ('decision', BOOL)])
register(ConfirmReply, 0x51, [('sealed', SEALED)])
register(DebitCommitBody, 0x52, [('server', UUID), ('correlator', TOKEN), ('ticket', TOKEN),
                                 ('amount', QUANTITY)])
register(DebitCommit, 0x53, [('sealed', SEALED)])
register(DebitResultBody, 0x54, [('correlator', TOKEN), ('failure', Maybe(ValueOf(Failure)))])
register(DebitResult, 0x55, [('sealed', SEALED)])
register(AnswerBody, 0x56, [('nonce', BYTES), ('answer', Maybe(BYTES)),
                            ('failure', Maybe(ValueOf(Failure)))])
register(ServerReply, 0x57, [('sealed', Maybe(SEALED)), ('failure', Maybe(ValueOf(Failure)))])
register(AclEntry, 0x58, [('ticket', TOKEN), ('resource', TOKEN), ('modifiers', MODIFIERS)])
register(LoadAcl, 0x59, [('entries', SortedOf(ValueOf(AclEntry)))])
register(RegisterAgreement, 0x5A, [('org', UUID), ('org_key', PUBLIC_KEY),
                                   ('implications', ValueOf(ImplicationMap)),
                                   ('agreement', ValueOf(ServiceAgreement))])
register(RegisterServer, 0x5B, [('server', UUID), ('server_key', PUBLIC_KEY)])
register(IssueEnrollment, 0x5C, [('certificate', ValueOf(EnrollmentCertificate)),
                                 ('expiry', INT)])


##################
# User -> server #
##################

@API.public
@final
class Credentials(ValueObject):
    """
    What a user agent needs to build a request: its ephemeral keys, one
    certificate binding them, and the clearance center that will read it.
    """
    __slots__ = ('ephemeral', 'org', 'certificate', 'clearance_key', 'clearance_id')
    ephemeral: EphemeralKeyPair
    org: uuid.UUID
    certificate: EnrollmentCertificate
    clearance_key: PublicKey
    clearance_id: Optional[uuid.UUID]


@API.public
def build_clearance_blob(ephemeral: KeyMaterial,
                         org: uuid.UUID,
                         certificate: EnrollmentCertificate,
                         clearance_key: PublicKey,
                         rng: Rng,
                         clearance_id: Optional[uuid.UUID] = None) -> ClearanceBlob:
    claim = sign(ephemeral, canonical_encode(Claim(org, certificate)))
    payload = ClearancePayload(ephemeral.public, claim)
    return ClearanceBlob(seal(clearance_key, canonical_encode(payload), rng, clearance_id))


@API.public
def build_request(credentials: Credentials,
                  server_key: PublicKey,
                  resource: Token,
                  params: Mapping[bytes, bytes],
                  now: int,
                  rng: Rng) -> Tuple[RequestEnvelope, Tau]:
    """
    Request for :code:`resource` with parameters :code:`params`, sealed to the
    server. The nonce of the returned :py:class:`Tau` identifies the answer.
    """
    tau = Tau(now, rng.token_bytes(NONCE_SIZE))
    clearance = build_clearance_blob(credentials.ephemeral, credentials.org,
                                     credentials.certificate, credentials.clearance_key,
                                     rng, credentials.clearance_id)
    body = RequestBody(sign(credentials.ephemeral, canonical_encode(tau)),
                       resource, params, clearance)
    return RequestEnvelope(seal(server_key, canonical_encode(body), rng)), tau


@API.public
@final
class ParsedRequest(ValueObject):
    """
    Components of a request. The tau signature is not checked yet: the server
    only learns the user's ephemeral key from the clearance center.
    """
    __slots__ = ('signed_tau', 'tau', 'resource', 'params', 'clearance')
    signed_tau: SignedBlob
    tau: Tau
    resource: Token
    params: Mapping[bytes, bytes]
    clearance: ClearanceBlob

    def _key(self) -> Tuple[object, ...]:
        return (self.signed_tau, self.resource, frozenset(self.params.items()),
                self.clearance)


@API.public
def parse_request(server_keys: KeyMaterial, envelope: Union[bytes, RequestEnvelope]
                  ) -> ParsedRequest:
    if isinstance(envelope, bytes):
        envelope = _decode(envelope, RequestEnvelope)
    body = _decode(_open(server_keys, envelope.sealed), RequestBody)
    tau = _decode(body.tau.payload, Tau)
    return ParsedRequest(body.tau, tau, body.resource, body.params, body.clearance)


@API.public
def verify_tau(request: ParsedRequest, ephemeral_key: PublicKey) -> bool:
    return verify(ephemeral_key, request.signed_tau)


####################
# Server <-> center #
####################

@API.public
def build_clearance_request(server_keys: KeyMaterial,
                            server_id: uuid.UUID,
                            clearance: ClearanceBlob,
                            candidates: AbstractSet[Token],
                            clearance_key: PublicKey,
                            rng: Rng,
                            clearance_id: Optional[uuid.UUID] = None) -> ClearanceRequest:
    body = ClearanceRequestBody(server_id, clearance, candidates)
    return ClearanceRequest(_signed_sealed(server_keys, body, clearance_key, rng,
                                           server_id, clearance_id))


@API.public
def parse_clearance_request(clearance_keys: KeyMaterial,
                            servers: Mapping[uuid.UUID, PublicKey],
                            request: Union[bytes, ClearanceRequest]
                            ) -> ClearanceRequestBody:
    """
    Raises:
        MalformedError: unparseable or not sealed to this clearance center.
        ProtocolFailure: BadSignature when the server is unknown or its signature
            does not verify.
    """
    if isinstance(request, bytes):
        request = _decode(request, ClearanceRequest)
    signed = _opened_signed(clearance_keys, request.sealed)
    body = _decode(signed.payload, ClearanceRequestBody)
    server_key = servers.get(body.server)
    if server_key is None:
        raise ProtocolFailure(FailureCode.BAD_SIGNATURE, "Unknown server")
    if not verify(server_key, signed):
        raise ProtocolFailure(FailureCode.BAD_SIGNATURE, "Server signature")
    return body


@API.public
def open_clearance_blob(clearance_keys: KeyMaterial, blob: ClearanceBlob
                        ) -> Tuple[PublicKey, SignedBlob, Claim]:
    """ Ephemeral key, signed claim and decoded (unverified) claim. """
    payload = _decode(_open(clearance_keys, blob.sealed), ClearancePayload)
    return payload.ephemeral_key, payload.claim, _decode(payload.claim.payload, Claim)


@API.public
def build_clearance_response(clearance_keys: KeyMaterial,
                             clearance_id: uuid.UUID,
                             server_key: PublicKey,
                             outcome: ClearanceOutcome,
                             rng: Rng,
                             server_id: Optional[uuid.UUID] = None) -> ClearanceResponse:
    return ClearanceResponse(_signed_sealed(clearance_keys, outcome, server_key, rng,
                                            clearance_id, server_id))


@API.public
def build_ticket_response(clearance_keys: KeyMaterial,
                          clearance_id: uuid.UUID,
                          server_key: PublicKey,
                          grant: TicketGrant,
                          rng: Rng) -> ClearanceResponse:
    outcome = ClearanceOutcome(grant, None, grant.request_digest)
    return build_clearance_response(clearance_keys, clearance_id, server_key, outcome, rng)


@API.public
def parse_clearance_response(server_keys: KeyMaterial,
                             clearance_key: PublicKey,
                             response: Union[bytes, ClearanceResponse],
                             request_digest: Optional[bytes] = None) -> ClearanceOutcome:
    """
    Raises:
        MalformedError: unparseable.
        ProtocolFailure: BadSignature when not signed by the clearance center or
            answering another request.
    """
    if isinstance(response, bytes):
        response = _decode(response, ClearanceResponse)
    signed = _opened_signed(server_keys, response.sealed)
    if not verify(clearance_key, signed):
        raise ProtocolFailure(FailureCode.BAD_SIGNATURE, "Clearance center signature")
    outcome = _decode(signed.payload, ClearanceOutcome)
    if request_digest is not None and outcome.request_digest != request_digest:
        raise ProtocolFailure(FailureCode.BAD_SIGNATURE, "Response to another request")
    if outcome.grant is not None and outcome.grant.request_digest != outcome.request_digest:
        raise MalformedError("Inconsistent request digest")
    return outcome


@API.public
def build_debit_commit(server_keys: KeyMaterial,
                       server_id: uuid.UUID,
                       clearance_key: PublicKey,
                       correlator: Token,
                       ticket: Token,
                       amount: Quantity,
                       rng: Rng) -> DebitCommit:
    body = DebitCommitBody(server_id, correlator, ticket, amount)
    return DebitCommit(_signed_sealed(server_keys, body, clearance_key, rng, server_id))


@API.public
def parse_debit_commit(clearance_keys: KeyMaterial,
                       servers: Mapping[uuid.UUID, PublicKey],
                       commit: Union[bytes, DebitCommit]) -> DebitCommitBody:
    if isinstance(commit, bytes):
        commit = _decode(commit, DebitCommit)
    signed = _opened_signed(clearance_keys, commit.sealed)
    body = _decode(signed.payload, DebitCommitBody)
    server_key = servers.get(body.server)
    if server_key is None or not verify(server_key, signed):
        raise ProtocolFailure(FailureCode.BAD_SIGNATURE, "Server signature")
    return body


@API.public
def build_debit_result(clearance_keys: KeyMaterial,
                       server_key: PublicKey,
                       body: DebitResultBody,
                       rng: Rng) -> DebitResult:
    return DebitResult(_signed_sealed(clearance_keys, body, server_key, rng))


@API.public
def parse_debit_result(server_keys: KeyMaterial,
                       clearance_key: PublicKey,
                       result: Union[bytes, DebitResult]) -> DebitResultBody:
    if isinstance(result, bytes):
        result = _decode(result, DebitResult)
    signed = _opened_signed(server_keys, result.sealed)
    if not verify(clearance_key, signed):
        raise ProtocolFailure(FailureCode.BAD_SIGNATURE, "Clearance center signature")
    return _decode(signed.payload, DebitResultBody)


##################
# Server <-> user #
##################

@API.public
def build_confirm_ask(ephemeral_key: PublicKey, body: ConfirmAskBody, rng: Rng) -> ConfirmAsk:
    return ConfirmAsk(seal(ephemeral_key, canonical_encode(body), rng))


@API.public
def open_confirm_ask(ephemeral: KeyMaterial, ask: Union[bytes, ConfirmAsk]) -> ConfirmAskBody:
    if isinstance(ask, bytes):
        ask = _decode(ask, ConfirmAsk)
    return _decode(_open(ephemeral, ask.sealed), ConfirmAskBody)


@API.public
def build_confirm_reply(ephemeral: KeyMaterial,
                        server_key: PublicKey,
                        nonce: bytes,
                        decision: bool,
                        rng: Rng) -> ConfirmReply:
    return ConfirmReply(_signed_sealed(ephemeral, ConfirmReplyBody(nonce, decision),
                                       server_key, rng))


@API.public
def parse_confirm_reply(server_keys: KeyMaterial,
                        ephemeral_key: PublicKey,
                        reply: Union[bytes, ConfirmReply],
                        nonce: bytes) -> bool:
    """
    The user's decision. Raises BadSignature when not signed by the requesting
    ephemeral key or bound to another request.
    """
    if isinstance(reply, bytes):
        reply = _decode(reply, ConfirmReply)
    signed = _opened_signed(server_keys, reply.sealed)
    body = _decode(signed.payload, ConfirmReplyBody)
    if not verify(ephemeral_key, signed) or body.nonce != nonce:
        raise ProtocolFailure(FailureCode.BAD_SIGNATURE, "Confirmation signature")
    return body.decision


@API.public
def build_answer(ephemeral_key: PublicKey, nonce: bytes, answer: bytes, rng: Rng
                 ) -> ServerReply:
    body = AnswerBody(nonce, answer, None)
    return ServerReply(seal(ephemeral_key, canonical_encode(body), rng), None)


@API.public
def build_failure_reply(failure: Failure,
                        ephemeral_key: Optional[PublicKey] = None,
                        nonce: bytes = b'',
                        rng: Optional[Rng] = None) -> ServerReply:
    if ephemeral_key is None:
        return ServerReply(None, failure)
    body = AnswerBody(nonce, None, failure)
    return ServerReply(seal(ephemeral_key, canonical_encode(body), rng), None)


@API.public
def open_reply(ephemeral: KeyMaterial, reply: Union[bytes, ServerReply]) -> AnswerBody:
    if isinstance(reply, bytes):
        reply = _decode(reply, ServerReply)
    if reply.sealed is None:
        if reply.failure is None:
            raise MalformedError("Empty reply")
        return AnswerBody(b'', None, reply.failure)
    return _decode(_open(ephemeral, reply.sealed), AnswerBody)


@API.public
def open_answer(ephemeral: KeyMaterial, reply: Union[bytes, ServerReply]) -> bytes:
    """
    Answer bytes of a reply.

    Raises:
        DecryptFailure: not sealed to this ephemeral key.
        ProtocolFailure: the server denied the request.
    """
    body = open_reply(ephemeral, reply)
    if body.failure is not None:
        body.failure.raise_()
    if body.answer is None:
        raise MalformedError("Reply without answer nor failure")
    return body.answer

