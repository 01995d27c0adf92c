"""
Canonical, deterministic binary encoding of protocol values.

A top-level encoding is one version byte (0x01), one type tag and the fields in
declaration order. Integers are 64-bit big-endian, byte strings and UTF-8 strings
carry a 32-bit big-endian length, collections a 32-bit count. Sets and maps are
written in ascending order of the canonical bytes of their elements (keys), so
equal values always produce identical bytes. Decoding refuses anything a
canonical encoder would not have produced.
"""
from __future__ import annotations

import enum
import struct
import uuid
from decimal import Decimal
from typing import (Any, Callable, cast, Dict, Iterable, List, Mapping, Optional,
                    Sequence, Tuple, Type, TypeVar, Union)

from .._internal import API
from ..core.exceptions import MalformedError

T = TypeVar('T')

VERSION = 0x01

_U32 = struct.Struct('>I')
_I64 = struct.Struct('>q')


@API.private
class Reader:
    __slots__ = ('data', 'offset')

    def __init__(self, data: bytes) -> None:
        self.data = data
        self.offset = 0

    def take(self, n: int) -> bytes:
        if n < 0 or self.offset + n > len(self.data):
            raise MalformedError(f"Truncated input at offset {self.offset}")
        chunk = self.data[self.offset:self.offset + n]
        self.offset += n
        return chunk

    def byte(self) -> int:
        return self.take(1)[0]

    def u32(self) -> int:
        return cast(int, _U32.unpack(self.take(4))[0])

    def i64(self) -> int:
        return cast(int, _I64.unpack(self.take(8))[0])

    @property
    def remaining(self) -> int:
        return len(self.data) - self.offset


@API.private
class Kind:
    """ Encoder/decoder of one field type. """

    def write(self, value: Any, out: bytearray) -> None:
        raise NotImplementedError()  # pragma: no cover

    def read(self, reader: Reader) -> Any:
        raise NotImplementedError()  # pragma: no cover

    def to_bytes(self, value: Any) -> bytes:
        out = bytearray()
        self.write(value, out)
        return bytes(out)


class _Int(Kind):
    def write(self, value: Any, out: bytearray) -> None:
        if isinstance(value, bool) or not isinstance(value, int):
            raise TypeError(f"Expected int, not {type(value)}")
        out += _I64.pack(value)

    def read(self, reader: Reader) -> Any:
        return reader.i64()


class _Bool(Kind):
    def write(self, value: Any, out: bytearray) -> None:
        out.append(1 if value else 0)

    def read(self, reader: Reader) -> Any:
        flag = reader.byte()
        if flag > 1:
            raise MalformedError(f"Invalid boolean byte {flag}")
        return flag == 1


class _Bytes(Kind):
    def write(self, value: Any, out: bytearray) -> None:
        if not isinstance(value, (bytes, bytearray)):
            raise TypeError(f"Expected bytes, not {type(value)}")
        out += _U32.pack(len(value))
        out += value

    def read(self, reader: Reader) -> Any:
        return reader.take(reader.u32())


class _Str(Kind):
    def write(self, value: Any, out: bytearray) -> None:
        BYTES.write(cast(str, value).encode('utf-8'), out)

    def read(self, reader: Reader) -> Any:
        try:
            return cast(bytes, BYTES.read(reader)).decode('utf-8')
        except UnicodeDecodeError as e:
            raise MalformedError("Invalid UTF-8 string") from e


class _Uuid(Kind):
    def write(self, value: Any, out: bytearray) -> None:
        BYTES.write(cast(uuid.UUID, value).bytes, out)

    def read(self, reader: Reader) -> Any:
        raw = cast(bytes, BYTES.read(reader))
        if len(raw) != 16:
            raise MalformedError("A UUID is 16 bytes")
        return uuid.UUID(bytes=raw)


class _Quantity(Kind):
    """ Flavor byte (0 integer, 1 decimal scaled by 10^4) then a 64-bit integer. """

    def write(self, value: Any, out: bytearray) -> None:
        if isinstance(value, Decimal):
            out.append(1)
            out += _I64.pack(int(value.scaleb(4)))
        else:
            out.append(0)
            INT.write(value, out)

    def read(self, reader: Reader) -> Any:
        flavor = reader.byte()
        raw = reader.i64()
        if flavor == 0:
            return raw
        if flavor == 1:
            return Decimal(raw).scaleb(-4)
        raise MalformedError(f"Unknown quantity flavor {flavor}")


class EnumOf(Kind):
    def __init__(self, cls: Type[enum.Enum], values: Optional[Dict[enum.Enum, int]] = None
                 ) -> None:
        self.cls = cls
        self.to_wire: Dict[enum.Enum, int] = values or {m: cast(int, m.value) for m in cls}
        self.from_wire = {v: m for m, v in self.to_wire.items()}

    def write(self, value: Any, out: bytearray) -> None:
        out.append(self.to_wire[value])

    def read(self, reader: Reader) -> Any:
        raw = reader.byte()
        try:
            return self.from_wire[raw]
        except KeyError:
            raise MalformedError(f"Unknown {self.cls.__name__} value {raw}")


class Maybe(Kind):
    def __init__(self, kind: Kind) -> None:
        self.kind = kind

    def write(self, value: Any, out: bytearray) -> None:
        if value is None:
            out.append(0)
        else:
            out.append(1)
            self.kind.write(value, out)

    def read(self, reader: Reader) -> Any:
        flag = reader.byte()
        if flag == 0:
            return None
        if flag == 1:
            return self.kind.read(reader)
        raise MalformedError(f"Invalid presence byte {flag}")


def _read_count(reader: Reader) -> int:
    count = reader.u32()
    # every element takes at least one byte
    if count > reader.remaining:
        raise MalformedError(f"Count {count} exceeds the remaining input")
    return count


class ListOf(Kind):
    """ Sequence kept in the given order, decoded as a tuple. """

    def __init__(self, kind: Kind) -> None:
        self.kind = kind

    def write(self, value: Any, out: bytearray) -> None:
        items = list(value)
        out += _U32.pack(len(items))
        for item in items:
            self.kind.write(item, out)

    def read(self, reader: Reader) -> Any:
        return tuple(self.kind.read(reader) for _ in range(_read_count(reader)))


class SortedOf(Kind):
    """
    Collection written in ascending order of element bytes. With :code:`unique` it
    is a set (duplicates refused when decoding), otherwise a multiset decoded as a
    tuple.
    """

    def __init__(self, kind: Kind, *, unique: bool = True) -> None:
        self.kind = kind
        self.unique = unique

    def write(self, value: Any, out: bytearray) -> None:
        encoded = sorted(self.kind.to_bytes(item) for item in value)
        if self.unique:
            encoded = sorted(set(encoded))
        out += _U32.pack(len(encoded))
        for chunk in encoded:
            out += chunk

    def read(self, reader: Reader) -> Any:
        items: List[Any] = []
        previous: Optional[bytes] = None
        for _ in range(_read_count(reader)):
            start = reader.offset
            items.append(self.kind.read(reader))
            chunk = reader.data[start:reader.offset]
            if previous is not None and (chunk < previous
                                         or (self.unique and chunk == previous)):
                raise MalformedError("Collection is not in canonical order")
            previous = chunk
        return frozenset(items) if self.unique else tuple(items)


class MapOf(Kind):
    def __init__(self, key: Kind, value: Kind) -> None:
        self.key = key
        self.value = value

    def write(self, value: Any, out: bytearray) -> None:
        entries = sorted(((self.key.to_bytes(k), v)
                          for k, v in cast(Mapping[Any, Any], value).items()),
                         key=lambda entry: entry[0])
        out += _U32.pack(len(entries))
        for key_bytes, item in entries:
            out += key_bytes
            self.value.write(item, out)

    def read(self, reader: Reader) -> Any:
        result: Dict[Any, Any] = {}
        previous: Optional[bytes] = None
        for _ in range(_read_count(reader)):
            start = reader.offset
            key = self.key.read(reader)
            chunk = reader.data[start:reader.offset]
            if previous is not None and chunk <= previous:
                raise MalformedError("Map keys are not in canonical order")
            previous = chunk
            result[key] = self.value.read(reader)
        return result


class PairOf(Kind):
    def __init__(self, left: Kind, right: Kind) -> None:
        self.left = left
        self.right = right

    def write(self, value: Any, out: bytearray) -> None:
        left, right = value
        self.left.write(left, out)
        self.right.write(right, out)

    def read(self, reader: Reader) -> Any:
        return self.left.read(reader), self.right.read(reader)


INT = _Int()
BOOL = _Bool()
BYTES = _Bytes()
STR = _Str()
UUID = _Uuid()
QUANTITY = _Quantity()

Field = Tuple[str, Kind]


@API.private
class Schema:
    __slots__ = ('cls', 'tag', 'fields', 'build')

    def __init__(self, cls: type, tag: int, fields: Sequence[Field],
                 build: Callable[..., Any]) -> None:
        self.cls = cls
        self.tag = tag
        self.fields = tuple(fields)
        self.build = build


_BY_TYPE: Dict[type, Schema] = {}
_BY_TAG: Dict[int, Schema] = {}


@API.public
def register(cls: type,
             tag: int,
             fields: Sequence[Field],
             build: Optional[Callable[..., Any]] = None) -> None:
    """
    Declares the wire layout of :code:`cls`. Fields are read with :code:`getattr`
    and the decoded value is rebuilt through :code:`build` (the class itself by
    default) with keyword arguments, so constructors validate decoded values.
    """
    assert 0 <= tag <= 0xFF
    if tag in _BY_TAG and _BY_TAG[tag].cls is not cls:
        raise ValueError(f"Tag {tag:#04x} already used by {_BY_TAG[tag].cls.__name__}")
    schema = Schema(cls, tag, fields, build or cls)
    _BY_TYPE[cls] = schema
    _BY_TAG[tag] = schema


@API.private
def schema_of(cls: type) -> Schema:
    try:
        return _BY_TYPE[cls]
    except KeyError:
        raise TypeError(f"{cls.__name__} has no canonical encoding")


class ValueOf(Kind):
    """
    Nested registered value: its tag followed by its fields. Restricted to
    subclasses of :code:`base`, which may be a union of types.
    """

    def __init__(self, base: Union[type, Tuple[type, ...]]) -> None:
        self.base = base

    def write(self, value: Any, out: bytearray) -> None:
        if not isinstance(value, self.base):
            raise TypeError(f"Expected {self.base}, not {type(value)}")
        schema = schema_of(type(value))
        out.append(schema.tag)
        for name, kind in schema.fields:
            kind.write(getattr(value, name), out)

    def read(self, reader: Reader) -> Any:
        tag = reader.byte()
        schema = _BY_TAG.get(tag)
        if schema is None or not issubclass(schema.cls, self.base):
            raise MalformedError(f"Unexpected type tag {tag:#04x}")
        values = {name: kind.read(reader) for name, kind in schema.fields}
        try:
            return schema.build(**values)
        except MalformedError:
            raise
        except (TypeError, ValueError, ArithmeticError) as e:
            raise MalformedError(f"Invalid {schema.cls.__name__}: {e}") from e


@API.public
def canonical_encode(value: object) -> bytes:
    """
    Canonical bytes of a registered protocol value.

    .. doctest:: envelope_codec

        >>> import uuid
        >>> from clearance.core import Token
        >>> from clearance.envelope import canonical_encode, canonical_decode
        >>> token = Token(uuid.UUID(int=1), b'read')
        >>> canonical_encode(token)[:2]
        b'\\x01\\x10'
        >>> canonical_decode(canonical_encode(token), Token) == token
        True
    """
    out = bytearray([VERSION])
    ValueOf(object).write(value, out)
    return bytes(out)


@API.public
def canonical_decode(data: bytes, expected: Union[Type[T], Tuple[type, ...]]) -> T:
    """
    Inverse of :py:func:`canonical_encode`. Any failure, including trailing bytes or
    a tag of another type, raises :py:exc:`~clearance.exceptions.MalformedError`.
    """
    if not isinstance(data, (bytes, bytearray)):
        raise MalformedError(f"Expected bytes, not {type(data)}")
    reader = Reader(bytes(data))
    try:
        version = reader.byte()
        if version != VERSION:
            raise MalformedError(f"Unsupported encoding version {version}")
        value = ValueOf(expected).read(reader)
    except MalformedError:
        raise
    except (struct.error, RecursionError, OverflowError, IndexError) as e:
        raise MalformedError(str(e)) from e
    if reader.remaining:
        raise MalformedError(f"{reader.remaining} trailing bytes")
    return cast(T, value)


@API.private
def tags() -> Mapping[int, type]:
    return {tag: schema.cls for tag, schema in _BY_TAG.items()}


@API.private
def encode_all(values: Iterable[object]) -> List[bytes]:
    return [canonical_encode(v) for v in values]
