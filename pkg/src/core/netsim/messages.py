"""
Base class for protocol message payloads.

A payload's wire form is a 1-byte tag followed by the canonical encoding of
its fields. Tags are registered once per process and listed in
docs/PROTOCOLS.md.
"""

from typing import Any, ClassVar, Self

from pydantic import BaseModel, ConfigDict

from src.core.crypto import KeyPair, hash_data, verify
from src.core.ledger import canonical_encode

TAGS: dict[int, type['Message']] = {}


class Message(BaseModel):
    """A frozen, tagged protocol message."""

    model_config = ConfigDict(frozen=True)

    TAG: ClassVar[int] = 0
    # Field replaced when a corrupted sender equivocates; None disables it.
    EQUIVOCABLE: ClassVar[str | None] = None

    def __init_subclass__(cls, **kwargs: Any) -> None:
        super().__init_subclass__(**kwargs)
        tag = cls.__dict__.get('TAG')
        if tag is None:
            return
        owner = TAGS.get(tag)
        if owner is not None and owner.__qualname__ != cls.__qualname__:
            raise ValueError(f'Message tag {tag:#04x} used by {owner.__name__} and {cls.__name__}')
        TAGS[tag] = cls

    @classmethod
    def kind(cls) -> str:
        return cls.__name__

    def encoded(self) -> bytes:
        return bytes([self.TAG]) + canonical_encode(self)

    def digest(self) -> bytes:
        return hash_data(self.encoded())

    def equivocate(self, value: str) -> Self:
        """Return a copy carrying `value` in the equivocable field."""
        if self.EQUIVOCABLE is None:
            return self
        current = getattr(self, self.EQUIVOCABLE)
        if isinstance(current, bytes):
            replacement: Any = hash_data(value.encode('utf-8'))
        elif isinstance(current, int):
            replacement = int(value)
        else:
            replacement = value
        return self.model_copy(update={self.EQUIVOCABLE: replacement})


class SignedMessage(Message):
    """A message whose `signature` covers every other field."""

    signer: bytes = b''
    signature: bytes = b''

    def signing_bytes(self) -> bytes:
        unsigned = self.model_copy(update={'signature': b''})
        return bytes([self.TAG]) + canonical_encode(unsigned)

    def signed(self, keys: KeyPair) -> Self:
        with_signer = self.model_copy(update={'signer': keys.public, 'signature': b''})
        return with_signer.model_copy(
            update={'signature': keys.sign(with_signer.signing_bytes())}
        )

    def verify_signature(self, scheme: str | None = None) -> bool:
        return verify(self.signer, self.signing_bytes(), self.signature, scheme)
