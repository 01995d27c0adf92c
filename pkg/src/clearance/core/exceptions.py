from __future__ import annotations

import enum
from typing import Optional

from .._internal import API


@API.public
class FailureCode(enum.Enum):
    """
    Reasons a transaction is denied. The wire carries the value as a single byte,
    so values must never be renumbered.
    """
    NOT_AUTHORIZED = 1
    UNKNOWN_ORG = 2
    BAD_SIGNATURE = 3
    EXPIRED = 4
    REPLAY = 5
    MODIFIER_DENIED = 6
    DEBIT_EXHAUSTED = 7
    CONFIRM_REQUIRED = 8
    MALFORMED = 9

    @property
    def display_name(self) -> str:
        """ CamelCase name used in reports, scenario files and on stderr. """
        return ''.join(part.capitalize() for part in self.name.split('_'))

    @classmethod
    def from_display_name(cls, name: str) -> FailureCode:
        for code in cls:
            if code.display_name == name:
                return code
        raise ValueError(f"Unknown failure code {name!r}")


@API.public
class ClearanceError(Exception):
    """ Base class of all errors of clearance. """

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self})"


@API.public
class ProtocolFailure(ClearanceError):
    """
    A verification step failed. Actors convert it into a wire failure at their
    boundary, it never crosses the network as an exception.
    """

    def __init__(self, code: FailureCode, detail: str = "") -> None:
        self.code = code
        self.detail = detail
        super().__init__(f"{code.display_name}: {detail}" if detail else code.display_name)


@API.public
class MalformedError(ProtocolFailure):
    """
    Bytes could not be parsed into the expected value.
    """

    def __init__(self, detail: str = "") -> None:
        super().__init__(FailureCode.MALFORMED, detail)


@API.public
class DecryptFailure(MalformedError):
    """
    A sealed blob could not be opened with the given private key.
    """


@API.public
class RefusalError(ClearanceError):
    """
    An administrator refused a request, typically for an unknown member.
    """


@API.public
class HarnessError(ClearanceError):
    """
    Misuse of the simulated network: unknown endpoint, unknown sequence number.
    """


@API.public
class MessageDropped(HarnessError):
    """
    The adversary dropped the message, the receiver never saw it.
    """

    def __init__(self, seq: int) -> None:
        self.seq = seq
        super().__init__(f"Message #{seq} was dropped")


@API.public
class ScenarioError(ClearanceError):
    """
    A scenario document does not validate. :code:`path` locates the offending node.
    """

    def __init__(self, message: str, path: Optional[str] = None) -> None:
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


@API.public
class ConfigurationError(ClearanceError):
    """
    Invalid configuration, for example marker crypto without the unsafe flag.
    """
