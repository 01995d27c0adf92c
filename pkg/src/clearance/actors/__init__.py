from .agents import (AgentConfig, approve, ConfirmDecision, decline,
                     DEFAULT_CERTIFICATE_LIFETIME, HeldCertificate, negotiate_agreement,
                     OrgAdmin, ProducerAdmin, RotationPolicy, SentRequest, ServerContact,
                     UserAgent)
from .center import (CenterState, ClearanceCenter, ClearanceConfig,
                     DEFAULT_CORRELATOR_TIMEOUT, LedgerKey, OrgRecord, PendingDebit)
from .server import (DEFAULT_REPLAY_WINDOW, ReplayCache, ResourceKind, ResourceServer,
                     ResourceSpec, ServerConfig)
from .transport import DirectTransport, Node, Transport

__all__ = ['AgentConfig', 'approve', 'ConfirmDecision', 'decline',
           'DEFAULT_CERTIFICATE_LIFETIME', 'HeldCertificate', 'negotiate_agreement',
           'OrgAdmin', 'ProducerAdmin', 'RotationPolicy', 'SentRequest', 'ServerContact',
           'UserAgent',
           'CenterState', 'ClearanceCenter', 'ClearanceConfig', 'DEFAULT_CORRELATOR_TIMEOUT',
           'LedgerKey', 'OrgRecord', 'PendingDebit', 'DEFAULT_REPLAY_WINDOW', 'ReplayCache',
           'ResourceKind', 'ResourceServer', 'ResourceSpec', 'ServerConfig',
           'DirectTransport', 'Node', 'Transport']
