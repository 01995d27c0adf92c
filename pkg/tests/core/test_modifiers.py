from decimal import Decimal

import pytest

from clearance.core import (compose_modifiers, covers, Debit, EvalContext, Layer,
                            ModifierSet, normalize_quantity, ParamConstraint, sort_modifiers,
                            TimeOfDay, TimeWindow, use_limit, Verdict)

DAY = 86400


def ctx(now=0, **kwargs):
    return EvalContext(now, **kwargs)


def test_time_window_bounds_are_inclusive():
    window = TimeWindow(100, 200)
    assert window.evaluate(ctx(100)) is Verdict.PASS
    assert window.evaluate(ctx(200)) is Verdict.PASS
    assert window.evaluate(ctx(99)) is Verdict.FAIL
    assert window.evaluate(ctx(201)) is Verdict.FAIL
    assert TimeWindow(5, 5).evaluate(ctx(5)) is Verdict.PASS
    with pytest.raises(ValueError):
        TimeWindow(2, 1)


@pytest.mark.parametrize('minute,expected', [
    (8 * 60, Verdict.PASS),
    (17 * 60, Verdict.PASS),
    (7 * 60 + 59, Verdict.FAIL),
    (17 * 60 + 1, Verdict.FAIL),
])
def test_time_of_day(minute, expected):
    prime_shift = TimeOfDay(8 * 60, 17 * 60)
    assert prime_shift.evaluate(ctx(3 * DAY + minute * 60 + 30)) is expected


def test_time_of_day_wraps_past_midnight():
    night = TimeOfDay(22 * 60, 6 * 60)
    assert night.evaluate(ctx(23 * 3600)) is Verdict.PASS
    assert night.evaluate(ctx(DAY + 3600)) is Verdict.PASS
    assert night.evaluate(ctx(12 * 3600)) is Verdict.FAIL


@pytest.mark.parametrize('minute', [-1, 1440])
def test_time_of_day_range(minute):
    with pytest.raises(ValueError):
        TimeOfDay(minute, 0)


def test_normalize_quantity():
    assert normalize_quantity(3) == 3
    assert isinstance(normalize_quantity(3), int)
    assert normalize_quantity('1.5') == Decimal('1.5000')
    assert normalize_quantity(Decimal('0.0001')) == Decimal('0.0001')


@pytest.mark.parametrize('value,error', [
    (1.5, TypeError),
    (True, TypeError),
    (None, TypeError),
    (2 ** 63, ValueError),
    ('0.00001', ValueError),
    ('nope', ValueError),
    (Decimal(10) ** 14, ValueError),
])
def test_normalize_quantity_rejects(value, error):
    with pytest.raises(error):
        normalize_quantity(value)


def test_covers():
    assert covers(5, 5)
    assert not covers(4, 5)
    assert covers(Decimal('1.5'), Decimal('1.5'))
    assert not covers(Decimal('1.4999'), Decimal('1.5'))
    assert covers(2, Decimal('2.0000'))
    assert not covers(2, Decimal('0.5'))


def test_debit_evaluation():
    debit = use_limit(2)
    assert debit.evaluate(ctx()) is Verdict.PASS
    assert debit.evaluate(ctx(amount=3)) is Verdict.FAIL
    assert debit.with_remaining(0).evaluate(ctx()) is Verdict.FAIL
    assert debit.evaluate_partial(0) is Verdict.PASS
    assert debit.with_remaining(0).evaluate_partial(0) is Verdict.FAIL
    assert not debit.is_decimal
    with pytest.raises(ValueError):
        Debit(-1)


def test_debit_with_confirmation():
    debit = Debit(Decimal('10.00'), unit='EUR', requires_confirmation=True)
    assert debit.is_decimal
    assert debit.evaluate(ctx(amount=Decimal(3))) is Verdict.NEEDS_CONFIRMATION
    assert debit.evaluate(ctx(amount=Decimal(3), confirm_granted=True)) is Verdict.PASS
    # coverage is checked before asking
    assert debit.evaluate(ctx(amount=Decimal(11))) is Verdict.FAIL


def test_param_constraint():
    seats = ParamConstraint('seat', [b'A1', b'A2'])
    assert seats.evaluate(ctx(params={b'seat': b'A1'})) is Verdict.PASS
    assert seats.evaluate(ctx(params={b'seat': b'B1'})) is Verdict.FAIL
    assert seats.evaluate(ctx(params={})) is Verdict.FAIL
    # deferred to the server
    assert seats.evaluate_partial(0) is Verdict.PASS


def test_eval_context_rejects_negative_time():
    with pytest.raises(ValueError):
        EvalContext(-1)


def test_sort_modifiers_is_canonical():
    a, b = TimeWindow(0, 10), use_limit(3)
    assert sort_modifiers([a, b]) == sort_modifiers([b, a])
    with pytest.raises(TypeError):
        sort_modifiers(['not a modifier'])


def test_empty_composite_passes():
    assert ModifierSet().evaluate(ctx()).verdict is Verdict.PASS
    assert ModifierSet().evaluate_partial(0).verdict is Verdict.PASS


def test_fail_dominates_confirmation():
    composite = compose_modifiers(
        [Debit(5, requires_confirmation=True)],
        [TimeWindow(10, 20)])
    evaluation = composite.evaluate(ctx(0))
    assert evaluation.verdict is Verdict.FAIL
    assert isinstance(evaluation.culprit, TimeWindow)
    assert not evaluation.debit_failed

    evaluation = composite.evaluate(ctx(15))
    assert evaluation.verdict is Verdict.NEEDS_CONFIRMATION
    assert evaluation.confirmations == (Debit(5, requires_confirmation=True),)


def test_debit_failure_is_reported():
    evaluation = compose_modifiers(server=[use_limit(0)]).evaluate(ctx())
    assert evaluation.verdict is Verdict.FAIL
    assert evaluation.debit_failed


def test_composite_layers():
    window, limit, seats = TimeWindow(0, 1), use_limit(1), ParamConstraint('s', [b'x'])
    composite = compose_modifiers([window], [limit], [seats], ticket=[TimeWindow(0, 2)])
    assert composite.modifiers(Layer.SERVER) == [seats]
    assert composite.modifiers(Layer.ENROLLMENT) == [window]
    assert composite.debits() == [limit]
    assert len(composite.modifiers()) == 4


@pytest.mark.parametrize('key,values,error', [
    ('', [b'a'], ValueError),
    ('\ud800', [b'a'], ValueError),
    (b'seat', [b'a'], TypeError),
    ('seat', ['a'], TypeError),
    ('seat', [b'a', 7], TypeError),
])
def test_param_constraint_arguments(key, values, error):
    with pytest.raises(error):
        ParamConstraint(key, values)


def test_failure_names_the_layer():
    composite = compose_modifiers([TimeWindow(0, 100)], [TimeWindow(0, 10)],
                                  [TimeOfDay(0, 60)])
    assert composite.evaluate(ctx(5)).describe() == ''
    assert composite.evaluate(ctx(50)).layer is Layer.AGREEMENT
    assert composite.evaluate(ctx(50)).describe() == 'agreement layer'
    assert composite.evaluate(ctx(DAY + 5)).describe() == 'enrollment layer'
    assert composite.evaluate_partial(50).describe() == 'agreement layer'
