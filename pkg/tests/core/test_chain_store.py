"""Tests for chain persistence and verification."""

from pathlib import Path

import pytest

from src.core.crypto import keygen
from src.core.ledger import (
    ChainStore,
    CorruptChainFile,
    build_block,
    genesis_block,
    make_transaction,
    verify_chain_file,
)

KEYS = keygen(b'store', 'sim-hash')


def write_chain(path: Path, length: int = 3) -> list[int]:
    """Write genesis plus `length` blocks; return each record's end offset."""
    blocks = [genesis_block()]
    for height in range(1, length + 1):
        tx = make_transaction(KEYS, f'tx-{height}'.encode(), height)
        blocks.append(
            build_block(
                KEYS, blocks[-1], slot=height, dynasty_id=0, credit=1, transactions=[tx]
            )
        )
    ChainStore(path).write_chain(blocks)

    ends, offset = [], 0
    for block in blocks:
        offset += 4 + len(block.canonical_bytes())
        ends.append(offset)
    return ends


def record_of(offset: int, ends: list[int]) -> int:
    return next(i for i, end in enumerate(ends) if offset < end)


def test_intact_chain_verifies(tmp_path: Path):
    """Test that a freshly written chain passes verification."""
    path = tmp_path / 'chain.bin'
    write_chain(path)

    report = verify_chain_file(path, scheme='sim-hash')

    assert report.blocks == 4
    assert report.tip_height == 3


def test_load_round_trip(tmp_path: Path):
    """Test that appended blocks load back in order."""
    path = tmp_path / 'chain.bin'
    store = ChainStore(path)
    genesis = genesis_block()
    child = build_block(KEYS, genesis, slot=1, dynasty_id=0, credit=1)
    store.append(genesis)
    store.append(child)

    assert store.load() == [genesis, child]


def test_every_single_byte_corruption_is_detected(tmp_path: Path):
    """Test that flipping any byte fails verification at the right height."""
    path = tmp_path / 'chain.bin'
    ends = write_chain(path)
    original = path.read_bytes()

    for offset in range(len(original)):
        corrupted = bytearray(original)
        corrupted[offset] ^= 0xFF
        path.write_bytes(bytes(corrupted))

        with pytest.raises(CorruptChainFile) as exc_info:
            verify_chain_file(path, scheme='sim-hash')
        assert exc_info.value.height == record_of(offset, ends), offset


def test_empty_file_is_corrupt(tmp_path: Path):
    """Test that an empty chain file is rejected."""
    path = tmp_path / 'chain.bin'
    path.write_bytes(b'')
    with pytest.raises(CorruptChainFile):
        verify_chain_file(path)
