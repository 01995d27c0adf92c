from .immutable import FinalImmutable, Immutable, SlotsRepr, ValueEquality, ValueObject
from .. import API

__all__ = ['API', 'FinalImmutable', 'Immutable', 'SlotsRepr', 'ValueEquality', 'ValueObject']
