import pytest

from clearance.core import (ClearanceError, ConfigurationError, DecryptFailure, FailureCode,
                            HarnessError, MalformedError, MessageDropped, ProtocolFailure,
                            RefusalError, ScenarioError)


@pytest.mark.parametrize('error', [
    ProtocolFailure(FailureCode.REPLAY),
    MalformedError(),
    DecryptFailure(),
    RefusalError(),
    HarnessError(),
    MessageDropped(3),
    ScenarioError("bad"),
    ConfigurationError(),
])
def test_inheritance(error):
    assert isinstance(error, ClearanceError)


def test_failure_codes_are_stable():
    assert [c.value for c in FailureCode] == list(range(1, 10))
    assert FailureCode.NOT_AUTHORIZED.display_name == 'NotAuthorized'
    assert FailureCode.DEBIT_EXHAUSTED.display_name == 'DebitExhausted'
    for code in FailureCode:
        assert FailureCode.from_display_name(code.display_name) is code
    with pytest.raises(ValueError):
        FailureCode.from_display_name('NOT_AUTHORIZED')


def test_protocol_failure_message():
    error = ProtocolFailure(FailureCode.EXPIRED, "certificate")
    assert error.code is FailureCode.EXPIRED
    assert str(error) == "Expired: certificate"
    assert str(ProtocolFailure(FailureCode.REPLAY)) == "Replay"
    assert repr(error) == "ProtocolFailure(Expired: certificate)"


def test_malformed_is_a_protocol_failure():
    assert MalformedError("x").code is FailureCode.MALFORMED
    assert DecryptFailure().code is FailureCode.MALFORMED


def test_scenario_error_path():
    error = ScenarioError("unknown user", "$.steps[2].user")
    assert error.path == "$.steps[2].user"
    assert str(error) == "$.steps[2].user: unknown user"
    assert MessageDropped(4).seq == 4


def test_core_exports_every_error():
    import clearance
    import clearance.core

    for name in ['ConfigurationError', 'HarnessError', 'MessageDropped', 'RefusalError',
                 'ScenarioError']:
        assert name in clearance.core.__all__
        assert getattr(clearance.core, name) is getattr(clearance, name)
