"""SHA-256 digests and big-endian integer helpers."""

from hashlib import sha256
from typing import Annotated

from pydantic import Field

DIGEST_SIZE = 32

Digest256 = Annotated[bytes, Field(min_length=DIGEST_SIZE, max_length=DIGEST_SIZE)]

ZERO_DIGEST: bytes = bytes(DIGEST_SIZE)


def hash_data(data: bytes) -> bytes:
    """Return the SHA-256 digest of `data`."""
    return sha256(data).digest()


def hash_concat(*parts: bytes) -> bytes:
    return sha256(b''.join(parts)).digest()


def u64(value: int) -> bytes:
    return value.to_bytes(8, 'big')


def leading_u64(data: bytes) -> int:
    """Interpret the first 8 bytes of `data` as a big-endian unsigned integer."""
    return int.from_bytes(data[:8], 'big')


def short_hex(digest: bytes, length: int = 12) -> str:
    return digest.hex()[:length]
