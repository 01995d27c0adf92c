from .core.exceptions import (ClearanceError, ConfigurationError, DecryptFailure,
                              FailureCode, HarnessError, MalformedError, MessageDropped,
                              ProtocolFailure, RefusalError, ScenarioError)

__all__ = [
    'ClearanceError',
    'ConfigurationError',
    'DecryptFailure',
    'FailureCode',
    'HarnessError',
    'MalformedError',
    'MessageDropped',
    'ProtocolFailure',
    'RefusalError',
    'ScenarioError',
]
