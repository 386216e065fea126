"""Append-only chain files: 4-byte big-endian length followed by canonical block bytes."""

import logging
from collections.abc import Iterable, Iterator
from pathlib import Path

from pydantic import BaseModel, ConfigDict, ValidationError

from src.core.ledger.blocks import genesis_block
from src.core.ledger.dto import Block
from src.core.ledger.encoding import u32
from src.core.ledger.errors import CorruptChainFile, DecodeError, InvalidBlock
from src.core.ledger.forktree import DEFAULT_EPOCH_LENGTH, ForkTree

logger = logging.getLogger(__name__)


class ChainStore:
    """Persists one linear chain, genesis first."""

    def __init__(self, path: Path) -> None:
        self.path = path

    def append(self, block: Block) -> None:
        data = block.canonical_bytes()
        with self.path.open('ab') as handle:
            handle.write(u32(len(data)) + data)

    def write_chain(self, blocks: Iterable[Block]) -> int:
        """Replace the file with the given blocks; returns the number written."""
        self.path.parent.mkdir(parents=True, exist_ok=True)
        count = 0
        with self.path.open('wb') as handle:
            for block in blocks:
                data = block.canonical_bytes()
                handle.write(u32(len(data)) + data)
                count += 1
        return count

    def records(self) -> Iterator[bytes]:
        """
        Yield raw block records in file order.

        Raises:
            CorruptChainFile: If a length prefix runs past the end of the file.
        """
        data = self.path.read_bytes()
        index, offset = 0, 0
        while offset < len(data):
            if offset + 4 > len(data):
                raise CorruptChainFile(index, index, 'truncated length prefix')
            size = int.from_bytes(data[offset : offset + 4], 'big')
            offset += 4
            if offset + size > len(data):
                raise CorruptChainFile(index, index, 'record runs past end of file')
            yield data[offset : offset + size]
            offset += size
            index += 1

    def load(self) -> list[Block]:
        blocks = []
        for index, record in enumerate(self.records()):
            try:
                blocks.append(Block.from_bytes(record))
            except (DecodeError, ValidationError) as exc:
                raise CorruptChainFile(index, index, f'undecodable block ({exc})')
        return blocks


class ChainReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    path: str
    blocks: int
    tip_height: int
    tip_hash: str


def verify_chain_file(
    path: Path,
    *,
    scheme: str | None = None,
    epoch_length: int = DEFAULT_EPOCH_LENGTH,
) -> ChainReport:
    """
    Reload a chain file into a fresh ForkTree and re-check every invariant.

    Record i of a chain file holds the block at height i, so the reported
    height is the record position even when the stored height field itself
    is the corrupted byte.

    Args:
        path: Chain file to check.
        scheme: Signature scheme the chain was signed with.
        epoch_length: Epoch length used to rebuild the tree.

    Returns:
        A ChainReport for an intact chain.

    Raises:
        CorruptChainFile: Naming the first offending record and height.
    """
    store = ChainStore(path)
    blocks = store.load()
    if not blocks:
        raise CorruptChainFile(0, 0, 'empty chain file')
    if blocks[0] != genesis_block():
        raise CorruptChainFile(0, 0, 'genesis block does not match')

    tree = ForkTree(epoch_length=epoch_length, scheme=scheme)
    previous = blocks[0]
    for index, block in enumerate(blocks[1:], start=1):
        if block.height != index:
            raise CorruptChainFile(index, index, f'stored height is {block.height}')
        if block.parent != previous.hash:
            raise CorruptChainFile(index, index, 'prev_hash does not link to record before')
        try:
            tree.insert_block(block)
        except InvalidBlock as exc:
            raise CorruptChainFile(index, index, exc.reason)
        previous = block
    tree.assert_valid()

    logger.info('verified %d blocks in %s', len(blocks), path)
    return ChainReport(
        path=str(path),
        blocks=len(blocks),
        tip_height=previous.height,
        tip_hash=previous.hash.hex(),
    )
