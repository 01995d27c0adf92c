from .actors import (ClearanceCenter, negotiate_agreement, OrgAdmin, ProducerAdmin,
                     ResourceServer, UserAgent)
from .core import (Debit, Enrollment, Grant, ImplicationMap, Modifier, ParamConstraint,
                   ServiceAgreement, Ticket, TimeOfDay, TimeWindow, Token, use_limit)
from .envelope import canonical_decode, canonical_encode, gen_keypair, Scheme
from .exceptions import (ClearanceError, ConfigurationError, DecryptFailure, FailureCode,
                         HarnessError, MalformedError, MessageDropped, ProtocolFailure,
                         RefusalError, ScenarioError)
from .simnet import Network, run_scenario, SimClock

try:
    from ._internal.scm_version import version as __version__
except ImportError:  # pragma: no cover
    __version__ = ''

__all__ = ['__version__', 'ClearanceCenter', 'negotiate_agreement', 'OrgAdmin',
           'ProducerAdmin', 'ResourceServer', 'UserAgent', 'Debit', 'Enrollment', 'Grant',
           'ImplicationMap', 'Modifier', 'ParamConstraint', 'ServiceAgreement', 'Ticket',
           'TimeOfDay', 'TimeWindow', 'Token', 'use_limit', 'canonical_decode',
           'canonical_encode', 'gen_keypair', 'Scheme', 'ClearanceError',
           'ConfigurationError', 'DecryptFailure', 'FailureCode', 'HarnessError',
           'MalformedError', 'MessageDropped', 'ProtocolFailure', 'RefusalError',
           'ScenarioError', 'Network', 'run_scenario', 'SimClock']
