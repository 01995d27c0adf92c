"""
Classification of the top-level messages exchanged between nodes. Only the
version byte and the type tag are read, so the transcript of a run can be
labelled without any key.
"""
from __future__ import annotations

from typing import Dict, Optional, Tuple, Type, Union

from .messages import (ClearanceRequest, ClearanceResponse, ConfirmAsk, ConfirmReply,
                       DebitCommit, DebitResult, IssueEnrollment, LoadAcl,
                       RegisterAgreement, RegisterServer, RequestEnvelope, ServerReply)
from .._internal import API
from ..envelope.codec import canonical_decode, schema_of, VERSION

WireMessage = Union[RequestEnvelope, ClearanceRequest, ClearanceResponse, ConfirmAsk,
                    ConfirmReply, DebitCommit, DebitResult, ServerReply]
AdminMessage = Union[LoadAcl, RegisterAgreement, RegisterServer, IssueEnrollment]

WIRE_TYPES: Tuple[type, ...] = (RequestEnvelope, ClearanceRequest, ClearanceResponse,
                                ConfirmAsk, ConfirmReply, DebitCommit, DebitResult,
                                ServerReply)
ADMIN_TYPES: Tuple[type, ...] = (LoadAcl, RegisterAgreement, RegisterServer, IssueEnrollment)

_KINDS: Dict[int, Type[object]] = {schema_of(cls).tag: cls
                                   for cls in WIRE_TYPES + ADMIN_TYPES}


@API.public
def message_type(data: bytes) -> Optional[Type[object]]:
    if len(data) < 2 or data[0] != VERSION:
        return None
    return _KINDS.get(data[1])


@API.public
def message_kind(data: bytes) -> str:
    """
    Name of the message type of :code:`data`, :code:`"Unknown"` for anything else.

    .. doctest:: protocol_wire

        >>> from clearance.protocol import message_kind
        >>> message_kind(b'\\x01\\x47')
        'RequestEnvelope'
        >>> message_kind(b'garbage')
        'Unknown'
    """
    cls = message_type(data)
    return cls.__name__ if cls is not None else 'Unknown'


@API.public
def decode_wire(data: bytes) -> WireMessage:
    """ Decodes any top-level message, raising MalformedError otherwise. """
    return canonical_decode(data, WIRE_TYPES)
