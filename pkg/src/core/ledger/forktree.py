"""Fork tree with orphan buffering, longest-chain fork choice and checkpoint finality."""

import logging
from collections import defaultdict
from enum import StrEnum

from pydantic import BaseModel, ConfigDict

from src.core.crypto import short_hex
from src.core.ledger.blocks import genesis_block, structural_problem
from src.core.ledger.dto import Block, Checkpoint
from src.core.ledger.errors import (
    ChainInvariantError,
    InvalidBlock,
    InvalidCheckpoint,
    SafetyViolation,
    UnknownBlock,
)

logger = logging.getLogger(__name__)

DEFAULT_EPOCH_LENGTH = 10
DEFAULT_MAX_PENDING = 1024


class InsertStatus(StrEnum):
    ADDED = 'added'
    PENDING = 'pending'
    DUPLICATE = 'duplicate'
    DROPPED = 'dropped'


class InsertOutcome(BaseModel):
    """Result of an insert; `attached` lists every block linked in, orphans included."""

    model_config = ConfigDict(frozen=True)

    status: InsertStatus
    attached: tuple[bytes, ...] = ()
    head_changed: bool = False


class ForkTree:
    """
    All valid blocks a node has received, keyed by hash.

    Blocks whose parent is unknown wait in a pending buffer of at most
    `max_pending` blocks and are linked in when the parent arrives. When the
    buffer is full the highest orphan is dropped. One tree is owned by exactly
    one node.
    """

    def __init__(
        self,
        epoch_length: int = DEFAULT_EPOCH_LENGTH,
        scheme: str | None = None,
        *,
        check_transactions: bool = True,
        max_pending: int = DEFAULT_MAX_PENDING,
    ) -> None:
        genesis = genesis_block()
        self.epoch_length = epoch_length
        self.scheme = scheme
        self.check_transactions = check_transactions
        self.max_pending = max_pending
        self.genesis = genesis.hash
        self.blocks: dict[bytes, Block] = {genesis.hash: genesis}
        self.children: dict[bytes, list[bytes]] = {genesis.hash: []}
        self.heads: set[bytes] = {genesis.hash}
        self.cum_height: dict[bytes, int] = {genesis.hash: 1}
        self.finalized: bytes = genesis.hash
        self.finalized_history: list[Checkpoint] = [
            Checkpoint(block_hash=genesis.hash, epoch=0, height=0)
        ]
        self.pending: dict[bytes, dict[bytes, Block]] = defaultdict(dict)
        # Pruned hash -> height, kept until the next finalization after that.
        self.pruned: dict[bytes, int] = {}

    def __contains__(self, block_hash: bytes) -> bool:
        return block_hash in self.blocks

    def __len__(self) -> int:
        return len(self.blocks)

    def get(self, block_hash: bytes) -> Block:
        try:
            return self.blocks[block_hash]
        except KeyError:
            raise UnknownBlock(block_hash)

    @property
    def pending_count(self) -> int:
        return sum(len(waiting) for waiting in self.pending.values())

    def insert_block(self, block: Block) -> InsertOutcome:
        """
        Attach a block under its parent, or buffer it until the parent arrives.

        Args:
            block: A block that has not necessarily been validated yet.

        Returns:
            InsertOutcome describing what happened.

        Raises:
            InvalidBlock: With reason bad-merkle, bad-signature, bad-transaction,
                bad-genesis, bad-height or conflicts-finalized. The tree is unchanged.
        """
        block_hash = block.hash
        if block_hash in self.blocks or block_hash in self.pending.get(block.parent, {}):
            return InsertOutcome(status=InsertStatus.DUPLICATE)

        reason = structural_problem(
            block, self.scheme, check_transactions=self.check_transactions
        )
        if reason is not None:
            raise InvalidBlock(reason, block_hash)
        if block.parent in self.pruned:
            raise InvalidBlock('conflicts-finalized', block_hash)

        if block.parent not in self.blocks:
            if block.height <= self.finalized_height:
                raise InvalidBlock('conflicts-finalized', block_hash)
            return self._buffer(block)

        self._check_link(block)
        before = self.longest_chain_head()
        attached = [self._attach(block)]
        attached.extend(self._release_orphans(block_hash))
        return InsertOutcome(
            status=InsertStatus.ADDED,
            attached=tuple(attached),
            head_changed=self.longest_chain_head() != before,
        )

    def _buffer(self, block: Block) -> InsertOutcome:
        self.pending[block.parent][block.hash] = block
        if self.pending_count > self.max_pending:
            _, parent, victim = max(
                (orphan.height, parent, orphan_hash)
                for parent, waiting in self.pending.items()
                for orphan_hash, orphan in waiting.items()
            )
            del self.pending[parent][victim]
            if not self.pending[parent]:
                del self.pending[parent]
            logger.debug('orphan buffer full, dropped %s', short_hex(victim))
            if victim == block.hash:
                return InsertOutcome(status=InsertStatus.DROPPED)
        logger.debug('buffered orphan %s', short_hex(block.hash))
        return InsertOutcome(status=InsertStatus.PENDING)

    def _drop_stale_orphans(self, height: int) -> None:
        """Forget orphans at or below a finalized height; they can never attach."""
        for parent in list(self.pending):
            kept = {h: b for h, b in self.pending[parent].items() if b.height > height}
            if kept:
                self.pending[parent] = kept
            else:
                del self.pending[parent]

    def _check_link(self, block: Block) -> None:
        parent = self.blocks[block.parent]
        if block.height != parent.height + 1:
            raise InvalidBlock('bad-height', block.hash)
        if parent.height < self.finalized_height:
            raise InvalidBlock('conflicts-finalized', block.hash)

    def _attach(self, block: Block) -> bytes:
        block_hash = block.hash
        self.blocks[block_hash] = block
        self.children[block_hash] = []
        self.children[block.parent].append(block_hash)
        self.cum_height[block_hash] = self.cum_height[block.parent] + 1
        self.heads.discard(block.parent)
        self.heads.add(block_hash)
        return block_hash

    def _release_orphans(self, parent_hash: bytes) -> list[bytes]:
        released = []
        queue = [parent_hash]
        while queue:
            waiting = self.pending.pop(queue.pop(), {})
            for orphan_hash in sorted(waiting):
                orphan = waiting[orphan_hash]
                try:
                    self._check_link(orphan)
                except InvalidBlock as exc:
                    logger.debug('dropped orphan %s: %s', short_hex(orphan_hash), exc.reason)
                    continue
                released.append(self._attach(orphan))
                queue.append(orphan_hash)
        return released

    def longest_chain_head(self) -> bytes:
        """Head with the greatest chain length; ties go to the smallest hash."""
        return min(self.heads, key=lambda h: (-self.cum_height[h], h))

    def head_block(self) -> Block:
        return self.blocks[self.longest_chain_head()]

    @property
    def finalized_height(self) -> int:
        return self.blocks[self.finalized].height

    def ancestor_at(self, block_hash: bytes, height: int) -> bytes:
        """Walk parents of `block_hash` down to the given height."""
        current = self.get(block_hash)
        while current.height > height:
            current = self.blocks[current.parent]
        return current.hash

    def is_ancestor(self, ancestor: bytes, descendant: bytes) -> bool:
        """True when `ancestor` lies on the chain ending at `descendant` (inclusive)."""
        if ancestor not in self.blocks or descendant not in self.blocks:
            return False
        height = self.blocks[ancestor].height
        if self.blocks[descendant].height < height:
            return False
        return self.ancestor_at(descendant, height) == ancestor

    def chain(self, block_hash: bytes | None = None) -> list[Block]:
        """Blocks from genesis to `block_hash` (default: the fork-choice head)."""
        current = self.get(block_hash or self.longest_chain_head())
        path = [current]
        while current.height > 0:
            current = self.blocks[current.parent]
            path.append(current)
        return path[::-1]

    def finalize(self, checkpoint: Checkpoint) -> list[bytes]:
        """
        Advance finality to a checkpoint and prune every conflicting branch.

        Args:
            checkpoint: The checkpoint agreed by voting.

        Returns:
            Hashes of pruned blocks, ordered by (height, hash).

        Raises:
            UnknownBlock: If the checkpoint block is not in the tree.
            InvalidCheckpoint: If its height is not an epoch boundary or mislabelled.
            SafetyViolation: If it does not descend from the finalized block.
        """
        block = self.get(checkpoint.block_hash)
        if block.height != checkpoint.height or checkpoint.height % self.epoch_length:
            raise InvalidCheckpoint(checkpoint.height, self.epoch_length)
        if checkpoint.block_hash == self.finalized:
            return []
        if not self.is_ancestor(self.finalized, checkpoint.block_hash):
            raise SafetyViolation(self.finalized, checkpoint.block_hash)

        keep = {b.hash for b in self.chain(checkpoint.block_hash)}
        stack = [checkpoint.block_hash]
        while stack:
            current = stack.pop()
            keep.add(current)
            stack.extend(self.children[current])

        doomed = sorted(
            (h for h in self.blocks if h not in keep),
            key=lambda h: (self.blocks[h].height, h),
        )
        heights = {h: self.blocks[h].height for h in doomed}
        for block_hash in doomed:
            del self.blocks[block_hash]
            del self.children[block_hash]
            del self.cum_height[block_hash]
            self.heads.discard(block_hash)
        for block_hash in keep:
            self.children[block_hash] = [c for c in self.children[block_hash] if c in keep]
        self._drop_stale_orphans(checkpoint.height)
        horizon = self.finalized_height
        self.pruned = {h: height for h, height in self.pruned.items() if height > horizon}
        self.pruned.update(heights)

        self.finalized = checkpoint.block_hash
        self.finalized_history.append(checkpoint)
        logger.debug(
            'finalized %s at height %d, pruned %d',
            short_hex(checkpoint.block_hash),
            checkpoint.height,
            len(doomed),
        )
        return doomed

    def assert_valid(self) -> None:
        """
        Full scan of the retained tree.

        Raises:
            ChainInvariantError: On a hash/key mismatch, broken parent link,
                wrong height or a head not descending from the finalized block.
        """
        for block_hash, block in self.blocks.items():
            if block.hash != block_hash:
                raise ChainInvariantError('hash does not match key', block_hash)
            if block.height == 0:
                continue
            parent = self.blocks.get(block.parent)
            if parent is None:
                raise ChainInvariantError('parent missing', block_hash)
            if parent.height + 1 != block.height:
                raise ChainInvariantError('height is not parent height + 1', block_hash)
            if self.cum_height[block_hash] != block.height + 1:
                raise ChainInvariantError('cumulative height mismatch', block_hash)
        for head in self.heads:
            if not self.is_ancestor(self.finalized, head):
                raise ChainInvariantError('head does not descend from finalized', head)
        heights = [cp.height for cp in self.finalized_history]
        if any(b <= a for a, b in zip(heights, heights[1:])):
            raise ChainInvariantError('finalized heights not increasing', self.finalized)
