"""
Modifiers restrict when and how an enrollment or a ticket is effective. The
vocabulary is a fixed set of primitives: time windows, time of day, debits and
parameter constraints. A composite is the conjunction of all its members.
"""
from __future__ import annotations

import enum
from decimal import Decimal, InvalidOperation
from typing import Iterable, List, Mapping, Optional, Tuple, Union

from typing_extensions import final

from .._internal import API
from .._internal.utils import Immutable, ValueEquality, ValueObject

Quantity = Union[int, Decimal]

MINUTES_PER_DAY = 1440
DECIMAL_PLACES = 4
_DECIMAL_QUANTUM = Decimal(1).scaleb(-DECIMAL_PLACES)
# decimal(18, 4)
_DECIMAL_LIMIT = Decimal(10) ** (18 - DECIMAL_PLACES)
_INT64_MAX = (1 << 63) - 1


@API.public
class Verdict(enum.Enum):
    PASS = 'pass'
    FAIL = 'fail'
    NEEDS_CONFIRMATION = 'needs_confirmation'


@API.public
@final
class EvalContext(ValueObject):
    """
    Variables a modifier is evaluated against. :code:`params` are the request
    parameters, :code:`amount` the quantity a debit would be charged.
    """
    __slots__ = ('now', 'params', 'confirm_granted', 'amount')
    now: int
    params: Mapping[bytes, bytes]
    confirm_granted: bool
    amount: Quantity

    def __init__(self,
                 now: int,
                 params: Optional[Mapping[bytes, bytes]] = None,
                 confirm_granted: bool = False,
                 amount: Quantity = 1) -> None:
        if now < 0:
            raise ValueError("now must be a non-negative epoch time")
        super().__init__(now=now,
                         params=dict(params or {}),
                         confirm_granted=confirm_granted,
                         amount=amount)

    def _key(self) -> Tuple[object, ...]:
        return (self.now, frozenset(self.params.items()), self.confirm_granted,
                self.amount)


@API.public
class Modifier(ValueEquality, Immutable):
    """
    Base class of the modifier primitives. Subclasses are final.
    """
    __slots__ = ()

    def evaluate(self, ctx: EvalContext) -> Verdict:
        raise NotImplementedError()  # pragma: no cover

    def evaluate_partial(self, now: int) -> Verdict:
        """
        What can be decided before the request parameters are known, at the
        clearance center. Anything undecidable passes here and is decided by the
        server.
        """
        return Verdict.PASS

    def sort_key(self) -> bytes:
        return repr(self).encode('utf-8')


@API.public
@final
class TimeWindow(Modifier):
    """ Effective from :code:`start` to :code:`end` inclusive, in epoch seconds. """
    __slots__ = ('start', 'end')
    start: int
    end: int

    def __init__(self, start: int, end: int) -> None:
        if start > end:
            raise ValueError(f"TimeWindow start {start} is after end {end}")
        super().__init__(start=start, end=end)

    def evaluate(self, ctx: EvalContext) -> Verdict:
        return self.evaluate_partial(ctx.now)

    def evaluate_partial(self, now: int) -> Verdict:
        return Verdict.PASS if self.start <= now <= self.end else Verdict.FAIL


@API.public
@final
class TimeOfDay(Modifier):
    """
    Effective between two minutes of the (UTC) day, bounds inclusive. A start
    after the end denotes a window wrapping past midnight.
    """
    __slots__ = ('start_minute', 'end_minute')
    start_minute: int
    end_minute: int

    def __init__(self, start_minute: int, end_minute: int) -> None:
        for minute in (start_minute, end_minute):
            if not 0 <= minute < MINUTES_PER_DAY:
                raise ValueError(f"Minute of day {minute} out of range 0-1439")
        super().__init__(start_minute=start_minute, end_minute=end_minute)

    def evaluate(self, ctx: EvalContext) -> Verdict:
        return self.evaluate_partial(ctx.now)

    def evaluate_partial(self, now: int) -> Verdict:
        minute = (now // 60) % MINUTES_PER_DAY
        if self.start_minute <= self.end_minute:
            inside = self.start_minute <= minute <= self.end_minute
        else:
            inside = minute >= self.start_minute or minute <= self.end_minute
        return Verdict.PASS if inside else Verdict.FAIL


@API.public
def normalize_quantity(value: object) -> Quantity:
    """
    Integers stay integers, anything else becomes a decimal(18, 4). Binary floats
    are refused: a debit must be conserved exactly.
    """
    if isinstance(value, bool) or isinstance(value, float):
        raise TypeError(f"Quantities must be int or Decimal, not {type(value)}")
    if isinstance(value, int):
        if not -_INT64_MAX - 1 <= value <= _INT64_MAX:
            raise ValueError(f"Integer quantity {value} does not fit in 64 bits")
        return value
    if isinstance(value, (Decimal, str)):
        try:
            quantity = Decimal(value)
            quantized = quantity.quantize(_DECIMAL_QUANTUM)
        except InvalidOperation as e:
            raise ValueError(f"Invalid decimal quantity {value!r}") from e
        if quantized != quantity:
            raise ValueError(f"{value} has more than {DECIMAL_PLACES} decimal places")
        if abs(quantized) >= _DECIMAL_LIMIT:
            raise ValueError(f"{value} does not fit in decimal(18, {DECIMAL_PLACES})")
        return quantized
    raise TypeError(f"Quantities must be int or Decimal, not {type(value)}")


@API.public
def covers(remaining: Quantity, amount: Quantity) -> bool:
    """ Whether :code:`remaining` can be charged :code:`amount`. """
    if isinstance(remaining, int) and isinstance(amount, Decimal) \
            and amount != amount.to_integral_value():
        return False
    return amount <= remaining


@API.public
@final
class Debit(Modifier):
    """
    Depletable quantity. The four flavors of the protocol are integer or decimal
    quantities, each with or without end-user confirmation. The decrement itself
    happens in the clearance center's ledger, evaluation only checks coverage.
    """
    __slots__ = ('remaining', 'unit', 'requires_confirmation', 'description')
    remaining: Quantity
    unit: str
    requires_confirmation: bool
    description: str

    def __init__(self,
                 remaining: Quantity,
                 unit: str = 'use',
                 requires_confirmation: bool = False,
                 description: str = '') -> None:
        quantity = normalize_quantity(remaining)
        if quantity < 0:
            raise ValueError("A debit cannot hold a negative quantity")
        super().__init__(remaining=quantity,
                         unit=unit,
                         requires_confirmation=bool(requires_confirmation),
                         description=description)

    @property
    def is_decimal(self) -> bool:
        return isinstance(self.remaining, Decimal)

    def evaluate(self, ctx: EvalContext) -> Verdict:
        if not covers(self.remaining, ctx.amount):
            return Verdict.FAIL
        if self.requires_confirmation and not ctx.confirm_granted:
            return Verdict.NEEDS_CONFIRMATION
        return Verdict.PASS

    def evaluate_partial(self, now: int) -> Verdict:
        return Verdict.PASS if self.remaining > 0 else Verdict.FAIL

    def with_remaining(self, remaining: Quantity) -> Debit:
        return self.replace(remaining=remaining)


@API.public
def use_limit(uses: int, description: str = '') -> Debit:
    """ Limited number of uses: an integer debit charged one unit per use. """
    return Debit(uses, unit='use', requires_confirmation=False, description=description)


@API.public
@final
class ParamConstraint(Modifier):
    """
    The request parameter :code:`param_key` must be present and hold one of the
    allowed values, e.g. particular seats of a theatre.
    """
    __slots__ = ('param_key', 'allowed_values')
    param_key: str
    allowed_values: Tuple[bytes, ...]

    def __init__(self, param_key: str, allowed_values: Iterable[bytes]) -> None:
        if not isinstance(param_key, str):
            raise TypeError(f"Parameter key must be a str, not {type(param_key)}")
        if not param_key:
            raise ValueError("Parameter key must not be empty")
        param_key.encode('utf-8')  # UnicodeEncodeError on lone surrogates
        allowed_values = set(allowed_values)
        for v in allowed_values:
            if not isinstance(v, bytes):
                raise TypeError(f"Allowed values must be bytes, not {type(v)}")
        super().__init__(param_key=param_key, allowed_values=tuple(sorted(allowed_values)))

    def evaluate(self, ctx: EvalContext) -> Verdict:
        value = ctx.params.get(self.param_key.encode('utf-8'))
        # absent parameters deny
        if value is None or value not in self.allowed_values:
            return Verdict.FAIL
        return Verdict.PASS


@API.public
def eval_modifier(modifier: Modifier, ctx: EvalContext) -> Verdict:
    return modifier.evaluate(ctx)


@API.public
def sort_modifiers(modifiers: Iterable[Modifier]) -> Tuple[Modifier, ...]:
    modifiers = tuple(modifiers)
    for m in modifiers:
        if not isinstance(m, Modifier):
            raise TypeError(f"Expected a Modifier, not {type(m)}")
    return tuple(sorted(modifiers, key=lambda m: (type(m).__name__, m.sort_key())))


@API.public
class Layer(enum.Enum):
    ENROLLMENT = 'enrollment'
    TICKET = 'ticket'
    AGREEMENT = 'agreement'
    SERVER = 'server'


@API.public
@final
class Evaluation(ValueObject):
    """
    Result of a composite. :code:`culprit` is the first failing member, if any,
    and :code:`layer` the layer it belongs to. :code:`confirmations` are the debits
    still waiting for the user.
    """
    __slots__ = ('verdict', 'culprit', 'confirmations', 'layer')
    verdict: Verdict
    culprit: Optional[Modifier]
    confirmations: Tuple[Debit, ...]
    layer: Optional[Layer]

    def __init__(self, verdict: Verdict, culprit: Optional[Modifier] = None,
                 confirmations: Iterable[Debit] = (), layer: Optional[Layer] = None) -> None:
        super().__init__(verdict=verdict, culprit=culprit,
                         confirmations=tuple(confirmations), layer=layer)

    @property
    def debit_failed(self) -> bool:
        return isinstance(self.culprit, Debit)

    def describe(self) -> str:
        """ Failure detail naming the layer that refused, e.g. :code:`"server layer"`. """
        return '' if self.layer is None else f"{self.layer.value} layer"


@API.public
@final
class ModifierSet(ValueObject):
    """
    Conjunction of the modifiers of every layer. Fail dominates everything,
    NeedsConfirmation dominates Pass, and an empty set passes.
    """
    __slots__ = ('members',)
    members: Tuple[Tuple[Layer, Modifier], ...]

    def __init__(self, members: Iterable[Tuple[Layer, Modifier]] = ()) -> None:
        super().__init__(members=tuple(members))

    def modifiers(self, *layers: Layer) -> List[Modifier]:
        return [m for layer, m in self.members if not layers or layer in layers]

    def debits(self) -> List[Debit]:
        return [m for _, m in self.members if isinstance(m, Debit)]

    def evaluate(self, ctx: EvalContext) -> Evaluation:
        verdict = Verdict.PASS
        culprit: Optional[Modifier] = None
        culprit_layer: Optional[Layer] = None
        confirmations: List[Debit] = []
        for layer, modifier in self.members:
            result = modifier.evaluate(ctx)
            if result is Verdict.FAIL:
                if culprit is None:
                    culprit, culprit_layer = modifier, layer
                verdict = Verdict.FAIL
            elif result is Verdict.NEEDS_CONFIRMATION:
                assert isinstance(modifier, Debit)
                confirmations.append(modifier)
                if verdict is Verdict.PASS:
                    verdict = Verdict.NEEDS_CONFIRMATION
        return Evaluation(verdict, culprit, confirmations, culprit_layer)

    def evaluate_partial(self, now: int) -> Evaluation:
        for layer, modifier in self.members:
            if modifier.evaluate_partial(now) is Verdict.FAIL:
                return Evaluation(Verdict.FAIL, modifier, layer=layer)
        return Evaluation(Verdict.PASS)


@API.public
def compose_modifiers(enrollment: Iterable[Modifier] = (),
                      agreement: Iterable[Modifier] = (),
                      server: Iterable[Modifier] = (),
                      *,
                      ticket: Iterable[Modifier] = ()) -> ModifierSet:
    """
    Complete modifier of a service delivery: the enrollment's, the ticket's and the
    agreement's (held by the clearance center) and the server's ACL modifiers.

    .. doctest:: core_modifiers_compose

        >>> from clearance.core import EvalContext, TimeWindow, Verdict, compose_modifiers
        >>> composite = compose_modifiers([TimeWindow(0, 100)], [TimeWindow(50, 200)])
        >>> composite.evaluate(EvalContext(now=75)).verdict
        <Verdict.PASS: 'pass'>
        >>> composite.evaluate(EvalContext(now=150)).verdict
        <Verdict.FAIL: 'fail'>
    """
    members: List[Tuple[Layer, Modifier]] = []
    for layer, modifiers in ((Layer.ENROLLMENT, enrollment),
                             (Layer.TICKET, ticket),
                             (Layer.AGREEMENT, agreement),
                             (Layer.SERVER, server)):
        members.extend((layer, m) for m in sort_modifiers(modifiers))
    return ModifierSet(members)
