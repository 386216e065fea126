"""Domain exceptions for the ledger."""


class LedgerError(Exception):
    """Base exception for ledger errors."""

    pass


class DecodeError(LedgerError):
    """Raised when bytes do not follow the canonical encoding."""

    def __init__(self, reason: str, offset: int) -> None:
        self.reason = reason
        self.offset = offset
        super().__init__(f'Malformed encoding at byte {offset}: {reason}')


class EmptyMerkleTree(LedgerError):
    """Raised when a Merkle root is requested over no leaves."""

    def __init__(self) -> None:
        super().__init__(
            'A Merkle root needs at least one leaf; use the empty-marker transaction'
        )


class InvalidBlock(LedgerError):
    """Raised when a block fails validation; `reason` is a stable code."""

    def __init__(self, reason: str, block_hash: bytes) -> None:
        self.reason = reason
        self.block_hash = block_hash
        super().__init__(f'Block {block_hash.hex()[:12]} rejected: {reason}')


class UnknownBlock(LedgerError):
    """Raised when a referenced block is not held by the tree."""

    def __init__(self, block_hash: bytes) -> None:
        self.block_hash = block_hash
        super().__init__(f'Block {block_hash.hex()[:12]} is not in the tree')


class InvalidCheckpoint(LedgerError):
    """Raised when a checkpoint is not at an epoch boundary or mislabels its block."""

    def __init__(self, height: int, epoch_length: int) -> None:
        self.height = height
        self.epoch_length = epoch_length
        super().__init__(
            f'Checkpoint height {height} is not a multiple of epoch length {epoch_length}'
        )


class SafetyViolation(LedgerError):
    """Raised when finalization would revert an already finalized block."""

    def __init__(self, finalized: bytes, checkpoint: bytes) -> None:
        self.finalized = finalized
        self.checkpoint = checkpoint
        super().__init__(
            f'Checkpoint {checkpoint.hex()[:12]} does not descend from '
            f'finalized block {finalized.hex()[:12]}'
        )


class ChainInvariantError(LedgerError):
    """Raised when a full-tree scan finds a broken link or hash."""

    def __init__(self, reason: str, block_hash: bytes) -> None:
        self.reason = reason
        self.block_hash = block_hash
        super().__init__(f'Chain invariant broken at {block_hash.hex()[:12]}: {reason}')


class CorruptChainFile(LedgerError):
    """Raised when a persisted chain fails to load or verify."""

    def __init__(self, record: int, height: int, reason: str) -> None:
        self.record = record
        self.height = height
        self.reason = reason
        super().__init__(f'Chain file corrupt at record {record} (height {height}): {reason}')
