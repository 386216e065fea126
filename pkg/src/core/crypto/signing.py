"""Pluggable deterministic signature schemes."""

from typing import Protocol

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat
from pydantic import BaseModel, ConfigDict

from src.core.config import app_settings
from src.core.crypto.errors import UnknownSignatureScheme
from src.core.crypto.hashing import hash_concat, hash_data


class SignatureScheme(Protocol):
    """Deterministic signing: the same (secret, message) always yields the same bytes."""

    name: str

    def public_key(self, secret: bytes) -> bytes: ...

    def sign(self, secret: bytes, message: bytes) -> bytes: ...

    def verify(self, public: bytes, message: bytes, signature: bytes) -> bool: ...


class Ed25519Scheme:
    """RFC 8032 Ed25519; signatures are deterministic per (key, message)."""

    name = 'ed25519'

    def public_key(self, secret: bytes) -> bytes:
        key = Ed25519PrivateKey.from_private_bytes(secret)
        return key.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw)

    def sign(self, secret: bytes, message: bytes) -> bytes:
        return Ed25519PrivateKey.from_private_bytes(secret).sign(message)

    def verify(self, public: bytes, message: bytes, signature: bytes) -> bool:
        try:
            Ed25519PublicKey.from_public_bytes(public).verify(signature, message)
        except (InvalidSignature, ValueError, TypeError):
            return False
        return True


class SimHashScheme:
    """
    Hash-only scheme for large Monte-Carlo sweeps.

    Signatures are hash(pk || message): binding to key and message, but anyone
    holding pk can produce one. Use only where forgery is outside the model.
    """

    name = 'sim-hash'

    def public_key(self, secret: bytes) -> bytes:
        return hash_concat(b'sim-hash/pk', secret)

    def sign(self, secret: bytes, message: bytes) -> bytes:
        return self._tag(self.public_key(secret), message)

    def verify(self, public: bytes, message: bytes, signature: bytes) -> bool:
        if not isinstance(signature, bytes) or len(signature) != 64:
            return False
        return signature == self._tag(public, message)

    @staticmethod
    def _tag(public: bytes, message: bytes) -> bytes:
        inner = hash_concat(b'sim-hash/sig', public, message)
        return inner + hash_data(inner)


SCHEMES: dict[str, SignatureScheme] = {
    Ed25519Scheme.name: Ed25519Scheme(),
    SimHashScheme.name: SimHashScheme(),
}


def get_scheme(name: str | None = None) -> SignatureScheme:
    """
    Look up a registered scheme.

    Args:
        name: Scheme name; defaults to the SIGNATURE_SCHEME setting.

    Raises:
        UnknownSignatureScheme: If the name is not registered.
    """
    key = name or app_settings.SIGNATURE_SCHEME
    try:
        return SCHEMES[key]
    except KeyError:
        raise UnknownSignatureScheme(key, sorted(SCHEMES))


class KeyPair(BaseModel):
    """A signing key and its public verification key."""

    model_config = ConfigDict(frozen=True)

    secret: bytes
    public: bytes
    scheme: str

    @property
    def node_name(self) -> str:
        """Short identity string derived from the public key."""
        return self.public.hex()[:16]

    def sign(self, message: bytes) -> bytes:
        return get_scheme(self.scheme).sign(self.secret, message)


def keygen(seed: bytes | str | int, scheme: str | None = None) -> KeyPair:
    """
    Derive a key pair deterministically from a seed.

    Args:
        seed: Any seed material; strings and integers are encoded first.
        scheme: Signature scheme name (defaults to the configured one).
    """
    if isinstance(seed, int):
        material = seed.to_bytes(8, 'big', signed=False)
    elif isinstance(seed, str):
        material = seed.encode('utf-8')
    else:
        material = seed
    impl = get_scheme(scheme)
    secret = hash_concat(b'keygen', material)
    return KeyPair(secret=secret, public=impl.public_key(secret), scheme=impl.name)


def sign(secret: bytes, message: bytes, scheme: str | None = None) -> bytes:
    return get_scheme(scheme).sign(secret, message)


def verify(
    public: bytes, message: bytes, signature: bytes, scheme: str | None = None
) -> bool:
    """Check a signature; malformed input yields False rather than an exception."""
    if not isinstance(public, bytes) or not isinstance(message, bytes):
        return False
    return get_scheme(scheme).verify(public, message, signature)
