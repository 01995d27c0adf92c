"""
Structural privacy scan of transcripts recorded with marker crypto.

Each sensitive value comes with the keys allowed to read it: wherever its
canonical bytes occur in a message, the innermost sealed region around them must
be addressed to one of those keys.
"""
from __future__ import annotations

from typing import AbstractSet, Dict, FrozenSet, Iterable, List, Mapping, Optional

from typing_extensions import final

from .net import Transcript
from .._internal import API
from .._internal.utils import ValueObject
from ..core.tokens import Enrollment, OrgId, Token
from ..envelope.codec import BYTES, canonical_encode, MapOf
from ..envelope.marker import find_regions, innermost
from ..protocol.messages import EnrollmentCertificate, Tau


@API.public
@final
class Sensitive(ValueObject):
    __slots__ = ('label', 'pattern', 'readers')
    label: str
    pattern: bytes
    readers: FrozenSet[bytes]

    def __init__(self, label: str, pattern: bytes, readers: Iterable[bytes]) -> None:
        if not pattern:
            raise ValueError("Empty pattern")
        super().__init__(label=label, pattern=pattern, readers=frozenset(readers))


@API.public
@final
class Leak(ValueObject):
    """ :code:`region` is the recipient of the innermost seal, if any. """
    __slots__ = ('seq', 'label', 'offset', 'region')
    seq: int
    label: str
    offset: int
    region: Optional[bytes]

    def __str__(self) -> str:
        where = self.region.hex() if self.region is not None else 'cleartext'
        return f"#{self.seq} {self.label} at {self.offset} ({where})"


@API.private
def nested(value: object) -> bytes:
    """ Bytes of a value as it appears nested in another: without the version byte. """
    return canonical_encode(value)[1:]


@API.public
def enrollment_pattern(enrollment: Enrollment, readers: AbstractSet[bytes]) -> Sensitive:
    return Sensitive(f"enrollment {enrollment}", nested(enrollment), readers)


@API.public
def org_pattern(org: OrgId, readers: AbstractSet[bytes]) -> Sensitive:
    return Sensitive(f"org {org}", org.bytes, readers)


@API.public
def certificate_pattern(certificate: EnrollmentCertificate, readers: AbstractSet[bytes]
                        ) -> Sensitive:
    return Sensitive("certificate", nested(certificate), readers)


@API.public
def resource_pattern(resource: Token, readers: AbstractSet[bytes]) -> Sensitive:
    return Sensitive(f"resource {resource}", nested(resource), readers)


@API.public
def params_pattern(params: Mapping[bytes, bytes], readers: AbstractSet[bytes]
                   ) -> Optional[Sensitive]:
    if not params:
        return None
    return Sensitive("params", MapOf(BYTES, BYTES).to_bytes(params), readers)


@API.public
def tau_pattern(tau: Tau, readers: AbstractSet[bytes]) -> Sensitive:
    return Sensitive("tau", nested(tau), readers)


@API.public
def scan_bytes(seq: int, data: bytes, sensitive: Iterable[Sensitive]) -> List[Leak]:
    regions = find_regions(data)
    leaks: List[Leak] = []
    for item in sensitive:
        offset = data.find(item.pattern)
        while offset != -1:
            region = innermost(regions, offset, offset + len(item.pattern))
            if region is None or region.recipient not in item.readers:
                leaks.append(Leak(seq, item.label, offset,
                                  None if region is None else region.recipient))
            offset = data.find(item.pattern, offset + 1)
    return leaks


@API.public
def merge_readers(sensitive: Iterable[Sensitive]) -> List[Sensitive]:
    """
    One item per pattern. A value sent by several users, such as equal request
    parameters, may be read by every key any of its senders allowed.
    """
    merged: Dict[bytes, Sensitive] = {}
    for item in sensitive:
        known = merged.get(item.pattern)
        merged[item.pattern] = item if known is None \
            else known.replace(readers=known.readers | item.readers)
    return list(merged.values())


@API.public
def scan_transcript(transcript: Transcript,
                    sensitive: Iterable[Sensitive],
                    forged: AbstractSet[int] = frozenset()) -> List[Leak]:
    """
    Every occurrence of a sensitive value outside a seal one of its readers can
    open. Piggybacked replies are scanned with their request.

    :code:`forged` are the entries the adversary injected: their bytes were not
    sent by a participant, only the replies to them are scanned.
    """
    sensitive = merge_readers(sensitive)
    leaks: List[Leak] = []
    for entry in transcript:
        if entry.seq not in forged:
            leaks.extend(scan_bytes(entry.seq, entry.data, sensitive))
        if entry.piggyback:
            leaks.extend(scan_bytes(entry.seq, entry.piggyback, sensitive))
    return leaks
