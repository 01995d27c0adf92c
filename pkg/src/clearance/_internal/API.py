"""
Stability levels of the clearance surface. Each marker tags the object with its
level, which :py:func:`stability` reads back.
"""
from typing import Callable, Optional, TypeVar

T = TypeVar('T')

_ATTR = '__clearance_api__'
PUBLIC = 'public'
EXPERIMENTAL = 'experimental'
PRIVATE = 'private'


def _marker(level: str) -> Callable[[T], T]:
    def mark(x: T) -> T:
        setattr(x, _ATTR, level)
        return x

    return mark


public = _marker(PUBLIC)
public.__doc__ = """
Wire formats and behavior only change together with the version byte of the
canonical encoding.
"""

experimental = _marker(EXPERIMENTAL)
experimental.__doc__ = """
Scenario helpers and drills which may change between releases while the protocol
itself stays fixed.
"""

private = _marker(PRIVATE)
private.__doc__ = "Internal, changes without warning."


def stability(x: object) -> Optional[str]:
    """ Level the object itself was marked with, inherited markers excluded. """
    level = getattr(x, '__dict__', {}).get(_ATTR)
    return level if isinstance(level, str) else None
