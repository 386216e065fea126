"""Unit tests for canonical encoding, Merkle roots and block construction."""

import pytest

from src.core.crypto import hash_concat, hash_data, keygen
from src.core.ledger import (
    EMPTY_MARKER,
    Block,
    BlockHeader,
    DecodeError,
    EmptyMerkleTree,
    build_block,
    canonical_bytes,
    genesis_block,
    make_transaction,
    merkle_root,
    structural_problem,
)

GENESIS_HASH = 'bbe2666d4f0068e1665007a6ab81a19664c89d6d3e98b160465acf25653bfcf9'
EMPTY_MARKER_ID = 'de47c9b27eb8d300dbb5f2c353e632c393262cf06340c4fa7f1b40c4cbd36f90'


def test_genesis_matches_pinned_vector():
    """Test the genesis header bytes and hash against pinned values."""
    genesis = genesis_block()
    header_bytes = canonical_bytes(genesis.header)

    assert len(header_bytes) == 108
    assert header_bytes[:40] == bytes(40)
    assert header_bytes[40:72].hex() == EMPTY_MARKER_ID
    assert header_bytes[72:] == bytes(36)
    assert genesis.hash.hex() == GENESIS_HASH
    assert EMPTY_MARKER.id.hex() == EMPTY_MARKER_ID
    assert len(canonical_bytes(genesis)) == 144


def test_block_round_trip():
    """Test that decoding canonical bytes returns an equal block."""
    keys = keygen(b'proposer')
    txs = [make_transaction(keys, f'tx-{i}'.encode(), i) for i in range(3)]
    block = build_block(
        keys, genesis_block(), slot=4, dynasty_id=1, credit=3, transactions=txs
    )

    decoded = Block.from_bytes(canonical_bytes(block))
    assert decoded == block
    assert decoded.hash == block.hash


def test_nonce_changes_bytes_and_hash():
    """Test that two headers differing only in nonce differ in bytes and hash."""
    header = genesis_block().header
    other = header.model_copy(update={'nonce': 1})
    assert canonical_bytes(header) != canonical_bytes(other)
    assert header.hash != other.hash


def test_header_integers_are_eight_byte_big_endian():
    """Test the declared field layout of a header."""
    header = BlockHeader(
        height=258,
        prev_hash=bytes(32),
        merkle_root=bytes(32),
        proposer_pk=b'\xaa\xbb',
        slot=1,
        dynasty_id=2,
        proposer_credit=3,
        nonce=4,
    )
    data = canonical_bytes(header)
    assert data[:8] == b'\x00' * 6 + b'\x01\x02'
    assert data[72:78] == b'\x00\x00\x00\x02\xaa\xbb'
    assert data[-8:] == (4).to_bytes(8, 'big')


def test_decode_rejects_trailing_and_truncated_bytes():
    """Test strict decoding."""
    data = canonical_bytes(genesis_block())
    with pytest.raises(DecodeError):
        Block.from_bytes(data + b'\x00')
    with pytest.raises(DecodeError):
        Block.from_bytes(data[:-1])


def test_transaction_id_covers_signature():
    """Test that the id hashes the canonical bytes, signature included."""
    keys = keygen(b'client')
    tx = make_transaction(keys, b'pay', 10)
    assert tx.id == hash_data(canonical_bytes(tx))
    resigned = tx.model_copy(update={'signature': b'\x00' * 64})
    assert resigned.id != tx.id


def test_merkle_single_leaf():
    """Test that a single leaf is its own root."""
    h1 = hash_data(b'1')
    assert merkle_root([h1]) == h1


def test_merkle_two_leaves():
    """Test the pairwise parent definition."""
    h1, h2 = hash_data(b'1'), hash_data(b'2')
    assert merkle_root([h1, h2]) == hash_concat(h1, h2)


def test_merkle_odd_leaf_is_duplicated():
    """Test the duplication rule for an odd node."""
    h1, h2, h3 = hash_data(b'1'), hash_data(b'2'), hash_data(b'3')
    expected = hash_concat(hash_concat(h1, h2), hash_concat(h3, h3))
    assert merkle_root([h1, h2, h3]) == expected


def test_merkle_empty_raises():
    """Test that an empty leaf list is rejected."""
    with pytest.raises(EmptyMerkleTree):
        merkle_root([])


def test_block_without_transactions_carries_empty_marker():
    """Test that an empty proposal uses the empty-marker transaction."""
    keys = keygen(b'proposer')
    block = build_block(keys, genesis_block(), slot=1, dynasty_id=0, credit=1)
    assert block.transactions == (EMPTY_MARKER,)
    assert structural_problem(block) is None


def test_structural_problem_codes():
    """Test the reason codes for tampered blocks."""
    keys = keygen(b'proposer')
    tx = make_transaction(keys, b'pay', 1)
    block = build_block(
        keys, genesis_block(), slot=1, dynasty_id=0, credit=1, transactions=[tx]
    )

    bad_merkle = block.model_copy(update={'transactions': (EMPTY_MARKER,)})
    assert structural_problem(bad_merkle) == 'bad-merkle'

    bad_header = block.header.model_copy(update={'slot': 2})
    bad_signature = block.model_copy(update={'header': bad_header})
    assert structural_problem(bad_signature) == 'bad-signature'

    forged_tx = tx.model_copy(update={'payload': b'steal'})
    forged = build_block(
        keys, genesis_block(), slot=1, dynasty_id=0, credit=1, transactions=[forged_tx]
    )
    assert structural_problem(forged) == 'bad-transaction'
    assert structural_problem(forged, check_transactions=False) is None
