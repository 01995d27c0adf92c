"""
Tokens, enrollments, tickets and service agreements.

Everything here is an immutable value and every function is pure, so all of it can
be shared between threads and actors freely.
"""
from __future__ import annotations

import uuid
from typing import (AbstractSet, Dict, FrozenSet, Iterable, Iterator, List, Mapping,
                    Optional, Set, Tuple)

from typing_extensions import final

from .modifiers import Modifier, sort_modifiers
from .._internal import API
from .._internal.utils import ValueObject

NodeId = uuid.UUID
OrgId = uuid.UUID
ServerId = uuid.UUID

MAX_TOKEN_VALUE = 64


@API.public
@final
class Token(ValueObject):
    """
    Opaque token minted by the node :code:`creator`. The value is unique among the
    tokens of its creator, so (creator, value) is globally unique. The label is only
    a print string for humans: it takes no part in equality and does not travel on
    the wire.

    .. doctest:: core_tokens_token

        >>> import uuid
        >>> from clearance.core import Token
        >>> creator = uuid.UUID(int=1)
        >>> Token(creator, b'read', label='Read access') == Token(creator, b'read')
        True
    """
    __slots__ = ('creator', 'value', 'label')
    creator: NodeId
    value: bytes
    label: str

    def __init__(self, creator: NodeId, value: bytes, label: str = '') -> None:
        if not isinstance(creator, uuid.UUID):
            raise TypeError(f"creator must be a UUID, not {type(creator)}")
        if not isinstance(value, bytes) or not 1 <= len(value) <= MAX_TOKEN_VALUE:
            raise ValueError(f"Token value must be 1 to {MAX_TOKEN_VALUE} bytes")
        if not isinstance(label, str):
            raise TypeError(f"label must be a str, not {type(label)}")
        super().__init__(creator=creator, value=value, label=label)

    def _key(self) -> Tuple[object, ...]:
        return self.creator.bytes, self.value

    def sort_key(self) -> Tuple[bytes, bytes]:
        """ Byte order used for every deterministic tie-break. """
        return self.creator.bytes, self.value

    def __str__(self) -> str:
        text = self.label or self.value.hex()
        return f"{text}@{str(self.creator)[:8]}"


@API.public
@final
class Enrollment(ValueObject):
    """
    Membership class issued by an organization. The user is not part of it: the
    enrollment certificate binds it to the holder's ephemeral key instead.
    """
    __slots__ = ('token', 'group')
    token: Token
    group: bytes

    def __init__(self, token: Token, group: bytes) -> None:
        if not isinstance(token, Token):
            raise TypeError(f"token must be a Token, not {type(token)}")
        if not isinstance(group, bytes):
            raise TypeError(f"group must be bytes, not {type(group)}")
        super().__init__(token=token, group=group)

    @property
    def org(self) -> OrgId:
        return self.token.creator

    def sort_key(self) -> Tuple[bytes, bytes, bytes]:
        return self.token.sort_key() + (self.group,)

    def __str__(self) -> str:
        return str(self.token)


@API.public
@final
class Ticket(ValueObject):
    """
    Permission to use any member of a class of resources, minted by a clearance
    center. Modifiers are held in canonical order so that evaluation and encoding
    never depend on the order they were given in.
    """
    __slots__ = ('token', 'modifiers')
    token: Token
    modifiers: Tuple[Modifier, ...]

    def __init__(self, token: Token, modifiers: Iterable[Modifier] = ()) -> None:
        if not isinstance(token, Token):
            raise TypeError(f"token must be a Token, not {type(token)}")
        super().__init__(token=token, modifiers=sort_modifiers(modifiers))

    def __str__(self) -> str:
        return str(self.token)


@API.public
@final
class Grant(ValueObject):
    """
    One entry of a service agreement: the ticket an enrollment maps to, and the
    modifiers the agreement adds on top of the ticket's own.
    """
    __slots__ = ('ticket', 'modifiers')
    ticket: Ticket
    modifiers: Tuple[Modifier, ...]

    def __init__(self, ticket: Ticket, modifiers: Iterable[Modifier] = ()) -> None:
        if not isinstance(ticket, Ticket):
            raise TypeError(f"ticket must be a Ticket, not {type(ticket)}")
        super().__init__(ticket=ticket, modifiers=sort_modifiers(modifiers))


@API.public
@final
class ImplicationMap(ValueObject):
    """
    Edges (left, right) meaning "holding left implies holding right". Cycles are
    allowed.
    """
    __slots__ = ('edges',)
    edges: FrozenSet[Tuple[Enrollment, Enrollment]]

    def __init__(self, edges: Iterable[Tuple[Enrollment, Enrollment]] = ()) -> None:
        frozen = frozenset((left, right) for left, right in edges)
        for left, right in frozen:
            if not isinstance(left, Enrollment) or not isinstance(right, Enrollment):
                raise TypeError("Implication edges must be pairs of Enrollment")
        super().__init__(edges=frozen)

    def successors(self) -> Dict[Enrollment, List[Enrollment]]:
        adjacency: Dict[Enrollment, List[Enrollment]] = {}
        for left, right in self.edges:
            adjacency.setdefault(left, []).append(right)
        return adjacency

    def __len__(self) -> int:
        return len(self.edges)


@API.public
@final
class ServiceAgreement(ValueObject):
    """
    Mapping from the enrollments of :code:`consumer_org` to grants, registered at
    the producer's clearance center.
    """
    __slots__ = ('consumer_org', 'grants')
    consumer_org: OrgId
    grants: Mapping[Enrollment, FrozenSet[Grant]]

    def __init__(self,
                 consumer_org: OrgId,
                 grants: Optional[Mapping[Enrollment, Iterable[Grant]]] = None) -> None:
        if not isinstance(consumer_org, uuid.UUID):
            raise TypeError(f"consumer_org must be a UUID, not {type(consumer_org)}")
        frozen: Dict[Enrollment, FrozenSet[Grant]] = {}
        for enrollment, entries in (grants or {}).items():
            if not isinstance(enrollment, Enrollment):
                raise TypeError("Grant keys must be Enrollment")
            entries = frozenset(entries)
            if entries:
                frozen[enrollment] = entries
        super().__init__(consumer_org=consumer_org, grants=frozen)

    def _key(self) -> Tuple[object, ...]:
        return self.consumer_org, frozenset(self.grants.items())

    def tickets(self) -> Iterator[Ticket]:
        for entries in self.grants.values():
            for grant in entries:
                yield grant.ticket

    def without(self,
                enrollment: Enrollment,
                ticket: Optional[Token] = None) -> ServiceAgreement:
        """
        Copy without the grants of :code:`enrollment`, or only without its grant of
        :code:`ticket` when given.
        """
        grants = dict(self.grants)
        if ticket is None:
            grants.pop(enrollment, None)
        elif enrollment in grants:
            grants[enrollment] = frozenset(g for g in grants[enrollment]
                                           if g.ticket.token != ticket)
        return ServiceAgreement(self.consumer_org, grants)

    def with_grant(self, enrollment: Enrollment, grant: Grant) -> ServiceAgreement:
        grants = dict(self.grants)
        grants[enrollment] = grants.get(enrollment, frozenset()) | {grant}
        return ServiceAgreement(self.consumer_org, grants)


@API.public
def enrollment_closure(enrollments: AbstractSet[Enrollment],
                       implications: ImplicationMap) -> FrozenSet[Enrollment]:
    """
    Least set containing :code:`enrollments` and closed under the implication edges.
    A visited set makes it terminate on cyclic maps.

    .. doctest:: core_tokens_closure

        >>> import uuid
        >>> from clearance.core import Enrollment, ImplicationMap, Token, enrollment_closure
        >>> org = uuid.UUID(int=7)
        >>> def e(name): return Enrollment(Token(org, name), name)
        >>> closed = enrollment_closure({e(b'purchasing')}, ImplicationMap([
        ...     (e(b'purchasing'), e(b'admin')), (e(b'admin'), e(b'employee'))]))
        >>> sorted(x.group for x in closed)
        [b'admin', b'employee', b'purchasing']
    """
    adjacency = implications.successors()
    closed: Set[Enrollment] = set(enrollments)
    pending = list(closed)
    while pending:
        for implied in adjacency.get(pending.pop(), ()):
            if implied not in closed:
                closed.add(implied)
                pending.append(implied)
    return frozenset(closed)


@API.public
@final
class GrantMatch(ValueObject):
    __slots__ = ('enrollment', 'ticket', 'modifiers')
    enrollment: Enrollment
    ticket: Ticket
    modifiers: Tuple[Modifier, ...]


@API.public
def agreement_lookup(agreement: ServiceAgreement,
                     closed: AbstractSet[Enrollment],
                     candidates: AbstractSet[Token]) -> Optional[GrantMatch]:
    """
    Grant whose enrollment is in :code:`closed` and whose ticket token is one of the
    :code:`candidates`. Among several, the lowest ticket token wins, then the lowest
    enrollment token (byte order), so that transcripts are reproducible.

    Returns:
        The chosen match or :py:obj:`None` when nothing authorizes any candidate.
    """
    best: Optional[Tuple[Tuple[bytes, ...], GrantMatch]] = None
    for enrollment in closed:
        for grant in agreement.grants.get(enrollment, ()):
            if grant.ticket.token not in candidates:
                continue
            order = (grant.ticket.token.sort_key() + enrollment.sort_key()
                     + tuple(m.sort_key() for m in grant.modifiers))
            if best is None or order < best[0]:
                best = (order, GrantMatch(enrollment, grant.ticket, grant.modifiers))
    return None if best is None else best[1]
