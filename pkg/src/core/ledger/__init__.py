"""Ledger domain module: blocks, Merkle roots, the fork tree and chain files."""

from src.core.ledger.blocks import (
    EMPTY_MARKER,
    build_block,
    genesis_block,
    is_empty_marker,
    make_transaction,
    structural_problem,
    verify_transaction,
)
from src.core.ledger.dto import Block, BlockHeader, Checkpoint, Transaction
from src.core.ledger.encoding import canonical_encode, encode_value
from src.core.ledger.errors import (
    ChainInvariantError,
    CorruptChainFile,
    DecodeError,
    EmptyMerkleTree,
    InvalidBlock,
    InvalidCheckpoint,
    LedgerError,
    SafetyViolation,
    UnknownBlock,
)
from src.core.ledger.forktree import (
    DEFAULT_EPOCH_LENGTH,
    ForkTree,
    InsertOutcome,
    InsertStatus,
)
from src.core.ledger.merkle import merkle_root
from src.core.ledger.store import ChainReport, ChainStore, verify_chain_file


def canonical_bytes(item: Block | BlockHeader | Transaction | Checkpoint) -> bytes:
    """Canonical serialization of a ledger object."""
    return item.canonical_bytes()


__all__ = [
    'Block',
    'BlockHeader',
    'Checkpoint',
    'Transaction',
    'EMPTY_MARKER',
    'DEFAULT_EPOCH_LENGTH',
    'build_block',
    'canonical_bytes',
    'canonical_encode',
    'encode_value',
    'genesis_block',
    'is_empty_marker',
    'make_transaction',
    'merkle_root',
    'structural_problem',
    'verify_transaction',
    'ForkTree',
    'InsertOutcome',
    'InsertStatus',
    'ChainStore',
    'ChainReport',
    'verify_chain_file',
    'LedgerError',
    'DecodeError',
    'EmptyMerkleTree',
    'InvalidBlock',
    'UnknownBlock',
    'InvalidCheckpoint',
    'SafetyViolation',
    'ChainInvariantError',
    'CorruptChainFile',
]
