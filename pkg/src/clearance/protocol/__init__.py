from .messages import (AclEntry, AnswerBody, build_answer, build_clearance_blob,
                       build_clearance_request, build_clearance_response,
                       build_confirm_ask, build_confirm_reply, build_debit_commit,
                       build_debit_result, build_failure_reply, build_request,
                       build_ticket_response, CertificateBody, Claim, ClearanceBlob,
                       ClearanceOutcome, ClearanceRequest, ClearanceRequestBody,
                       ClearanceResponse, ConfirmAsk, ConfirmAskBody, ConfirmReply,
                       Credentials, DebitCommit, DebitCommitBody, DebitResult,
                       DebitResultBody, digest, EnrollmentCertificate, Failure,
                       issue_certificate, IssueEnrollment, LoadAcl, NONCE_SIZE,
                       open_answer, open_clearance_blob, open_confirm_ask, open_reply,
                       parse_clearance_request, parse_clearance_response,
                       parse_confirm_reply, parse_debit_commit, parse_debit_result,
                       parse_request, ParsedRequest, RegisterAgreement, RegisterServer,
                       RequestEnvelope, ServerReply, Tau, TicketGrant, verify_tau)
from .wire import (ADMIN_TYPES, AdminMessage, decode_wire, message_kind, message_type,
                   WIRE_TYPES, WireMessage)

__all__ = ['AclEntry', 'AnswerBody', 'build_answer', 'build_clearance_blob',
           'build_clearance_request', 'build_clearance_response', 'build_confirm_ask',
           'build_confirm_reply', 'build_debit_commit', 'build_debit_result',
           'build_failure_reply', 'build_request', 'build_ticket_response',
           'CertificateBody', 'Claim', 'ClearanceBlob', 'ClearanceOutcome',
           'ClearanceRequest', 'ClearanceRequestBody', 'ClearanceResponse', 'ConfirmAsk',
           'ConfirmAskBody', 'ConfirmReply', 'Credentials', 'DebitCommit',
           'DebitCommitBody', 'DebitResult', 'DebitResultBody', 'digest',
           'EnrollmentCertificate', 'Failure', 'issue_certificate', 'IssueEnrollment',
           'LoadAcl', 'NONCE_SIZE', 'open_answer', 'open_clearance_blob',
           'open_confirm_ask', 'open_reply', 'parse_clearance_request',
           'parse_clearance_response', 'parse_confirm_reply', 'parse_debit_commit',
           'parse_debit_result', 'parse_request', 'ParsedRequest', 'RegisterAgreement',
           'RegisterServer', 'RequestEnvelope', 'ServerReply', 'Tau', 'TicketGrant',
           'verify_tau', 'ADMIN_TYPES', 'AdminMessage', 'decode_wire', 'message_kind',
           'message_type', 'WIRE_TYPES', 'WireMessage']
