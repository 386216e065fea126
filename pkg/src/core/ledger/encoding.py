"""
Canonical byte encoding.

Integers are 8-byte big-endian, 32-byte digest fields are written raw, every
other byte string is prefixed with its 4-byte big-endian length, and sequences
are a 4-byte count followed by their items.
"""

import struct
from enum import Enum
from typing import Any

from pydantic import BaseModel
from pydantic.fields import FieldInfo

from src.core.crypto import DIGEST_SIZE
from src.core.ledger.errors import DecodeError


def u32(value: int) -> bytes:
    return value.to_bytes(4, 'big')


def u64(value: int) -> bytes:
    return value.to_bytes(8, 'big')


def lp(data: bytes) -> bytes:
    """Length-prefix a byte string."""
    return u32(len(data)) + data


class Reader:
    """Cursor over canonical bytes; every read checks bounds."""

    def __init__(self, data: bytes) -> None:
        self._data = data
        self.offset = 0

    def raw(self, size: int) -> bytes:
        end = self.offset + size
        if end > len(self._data):
            raise DecodeError(f'needed {size} bytes, {self.remaining} left', self.offset)
        chunk = self._data[self.offset : end]
        self.offset = end
        return chunk

    def u32(self) -> int:
        return int.from_bytes(self.raw(4), 'big')

    def u64(self) -> int:
        return int.from_bytes(self.raw(8), 'big')

    def digest(self) -> bytes:
        return self.raw(DIGEST_SIZE)

    def lp(self) -> bytes:
        return self.raw(self.u32())

    @property
    def remaining(self) -> int:
        return len(self._data) - self.offset

    def finish(self) -> None:
        if self.remaining:
            raise DecodeError(f'{self.remaining} trailing bytes', self.offset)


def _is_digest_field(info: FieldInfo) -> bool:
    bounds = [
        getattr(item, attr)
        for item in info.metadata
        for attr in ('min_length', 'max_length')
        if getattr(item, attr, None) is not None
    ]
    return len(bounds) == 2 and set(bounds) == {DIGEST_SIZE}


def encode_value(value: Any, *, digest: bool = False) -> bytes:
    """Encode one value; objects exposing `canonical_bytes()` encode themselves."""
    if hasattr(value, 'canonical_bytes'):
        return lp(value.canonical_bytes())
    match value:
        case None:
            return b'\x00'
        case bool():
            return b'\x01' if value else b'\x00'
        case Enum():
            return encode_value(value.value)
        case int():
            return value.to_bytes(8, 'big', signed=value < 0)
        case float():
            return struct.pack('>d', value)
        case bytes() if digest and len(value) == DIGEST_SIZE:
            return value
        case bytes():
            return lp(value)
        case str():
            return lp(value.encode('utf-8'))
        case BaseModel():
            return lp(canonical_encode(value))
        case tuple() | list():
            return u32(len(value)) + b''.join(encode_value(item) for item in value)
        case frozenset() | set():
            items = sorted(encode_value(item) for item in value)
            return u32(len(items)) + b''.join(items)
        case dict():
            pairs = sorted(encode_value(k) + encode_value(v) for k, v in value.items())
            return u32(len(pairs)) + b''.join(pairs)
    raise TypeError(f'No canonical encoding for {type(value).__name__}')


def canonical_encode(model: BaseModel) -> bytes:
    """Encode a pydantic model's fields in declaration order."""
    parts = [
        encode_value(getattr(model, name), digest=_is_digest_field(info))
        for name, info in type(model).model_fields.items()
    ]
    return b''.join(parts)
