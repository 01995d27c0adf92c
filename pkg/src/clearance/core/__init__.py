from .exceptions import (ClearanceError, ConfigurationError, DecryptFailure, FailureCode,
                         HarnessError, MalformedError, MessageDropped, ProtocolFailure,
                         RefusalError, ScenarioError)
from .modifiers import (compose_modifiers, covers, Debit, eval_modifier, EvalContext,
                        Evaluation, Layer, Modifier, ModifierSet, normalize_quantity,
                        ParamConstraint, Quantity, sort_modifiers, TimeOfDay, TimeWindow,
                        use_limit, Verdict)
from .tokens import (agreement_lookup, Enrollment, enrollment_closure, Grant, GrantMatch,
                     ImplicationMap, NodeId, OrgId, ServerId, ServiceAgreement, Ticket,
                     Token)

__all__ = ['ClearanceError', 'ConfigurationError', 'DecryptFailure', 'FailureCode',
           'HarnessError', 'MalformedError', 'MessageDropped', 'ProtocolFailure',
           'RefusalError', 'ScenarioError', 'compose_modifiers', 'covers', 'Debit',
           'eval_modifier', 'EvalContext', 'Evaluation', 'Layer', 'Modifier', 'ModifierSet',
           'normalize_quantity', 'ParamConstraint', 'Quantity', 'sort_modifiers',
           'TimeOfDay', 'TimeWindow', 'use_limit', 'Verdict', 'agreement_lookup',
           'Enrollment', 'enrollment_closure', 'Grant', 'GrantMatch', 'ImplicationMap',
           'NodeId', 'OrgId', 'ServerId', 'ServiceAgreement', 'Ticket', 'Token']
