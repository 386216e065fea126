"""Pydantic models for transactions, blocks and checkpoints."""

from pydantic import BaseModel, ConfigDict, Field

from src.core.crypto import Digest256, hash_data
from src.core.ledger.encoding import Reader, lp, u32, u64


class Transaction(BaseModel):
    """A signed user transaction; `timestamp` is in simulated milliseconds."""

    model_config = ConfigDict(frozen=True)

    sender: bytes
    payload: bytes
    timestamp: int = Field(ge=0)
    signature: bytes = b''

    def signing_bytes(self) -> bytes:
        return lp(self.sender) + lp(self.payload) + u64(self.timestamp)

    def canonical_bytes(self) -> bytes:
        return self.signing_bytes() + lp(self.signature)

    @property
    def id(self) -> bytes:
        return hash_data(self.canonical_bytes())

    @classmethod
    def read(cls, reader: Reader) -> 'Transaction':
        return cls(
            sender=reader.lp(),
            payload=reader.lp(),
            timestamp=reader.u64(),
            signature=reader.lp(),
        )


class BlockHeader(BaseModel):
    model_config = ConfigDict(frozen=True)

    height: int = Field(ge=0)
    prev_hash: Digest256
    merkle_root: Digest256
    proposer_pk: bytes
    slot: int = Field(ge=0)
    dynasty_id: int = Field(ge=0)
    proposer_credit: int = Field(ge=0)
    nonce: int = Field(default=0, ge=0, lt=1 << 64)

    def canonical_bytes(self) -> bytes:
        return b''.join(
            [
                u64(self.height),
                self.prev_hash,
                self.merkle_root,
                lp(self.proposer_pk),
                u64(self.slot),
                u64(self.dynasty_id),
                u64(self.proposer_credit),
                u64(self.nonce),
            ]
        )

    @property
    def hash(self) -> bytes:
        return hash_data(self.canonical_bytes())

    @classmethod
    def read(cls, reader: Reader) -> 'BlockHeader':
        return cls(
            height=reader.u64(),
            prev_hash=reader.digest(),
            merkle_root=reader.digest(),
            proposer_pk=reader.lp(),
            slot=reader.u64(),
            dynasty_id=reader.u64(),
            proposer_credit=reader.u64(),
            nonce=reader.u64(),
        )


class Block(BaseModel):
    """A header, its ordered transactions and the proposer's signature over the header."""

    model_config = ConfigDict(frozen=True)

    header: BlockHeader
    transactions: tuple[Transaction, ...]
    proposer_signature: bytes = b''

    def canonical_bytes(self) -> bytes:
        parts = [lp(self.header.canonical_bytes()), u32(len(self.transactions))]
        parts.extend(lp(tx.canonical_bytes()) for tx in self.transactions)
        parts.append(lp(self.proposer_signature))
        return b''.join(parts)

    @property
    def hash(self) -> bytes:
        return self.header.hash

    @property
    def height(self) -> int:
        return self.header.height

    @property
    def parent(self) -> bytes:
        return self.header.prev_hash

    @classmethod
    def from_bytes(cls, data: bytes) -> 'Block':
        """
        Decode canonical block bytes.

        Raises:
            DecodeError: On truncation, trailing bytes or malformed fields.
        """
        reader = Reader(data)
        header_reader = Reader(reader.lp())
        header = BlockHeader.read(header_reader)
        header_reader.finish()

        transactions = []
        for _ in range(reader.u32()):
            tx_reader = Reader(reader.lp())
            transactions.append(Transaction.read(tx_reader))
            tx_reader.finish()
        signature = reader.lp()
        reader.finish()
        return cls(
            header=header,
            transactions=tuple(transactions),
            proposer_signature=signature,
        )


class Checkpoint(BaseModel):
    """The block at an epoch-boundary height, subject of finality voting."""

    model_config = ConfigDict(frozen=True)

    block_hash: Digest256
    epoch: int = Field(ge=0)
    height: int = Field(ge=0)

    def canonical_bytes(self) -> bytes:
        return self.block_hash + u64(self.epoch) + u64(self.height)
