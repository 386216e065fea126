"""Construction and structural validation of transactions and blocks."""

from collections.abc import Sequence
from functools import cache

from src.core.crypto import ZERO_DIGEST, KeyPair, verify
from src.core.ledger.dto import Block, BlockHeader, Transaction
from src.core.ledger.merkle import merkle_root

EMPTY_MARKER = Transaction(sender=b'', payload=b'', timestamp=0, signature=b'')


def is_empty_marker(tx: Transaction) -> bool:
    return tx == EMPTY_MARKER


def make_transaction(keys: KeyPair, payload: bytes, timestamp: int) -> Transaction:
    unsigned = Transaction(sender=keys.public, payload=payload, timestamp=timestamp)
    return unsigned.model_copy(update={'signature': keys.sign(unsigned.signing_bytes())})


def verify_transaction(tx: Transaction, scheme: str | None = None) -> bool:
    if is_empty_marker(tx):
        return True
    return verify(tx.sender, tx.signing_bytes(), tx.signature, scheme)


@cache
def genesis_block() -> Block:
    """The fixed, unsigned height-0 block shared by every chain."""
    header = BlockHeader(
        height=0,
        prev_hash=ZERO_DIGEST,
        merkle_root=merkle_root([EMPTY_MARKER.id]),
        proposer_pk=b'',
        slot=0,
        dynasty_id=0,
        proposer_credit=0,
    )
    return Block(header=header, transactions=(EMPTY_MARKER,))


def build_block(
    keys: KeyPair,
    parent: Block,
    *,
    slot: int,
    dynasty_id: int,
    credit: int,
    transactions: Sequence[Transaction] = (),
    nonce: int = 0,
) -> Block:
    """
    Build and sign a block extending `parent`.

    Args:
        keys: The proposer's key pair.
        parent: Block being extended.
        slot: Proposal slot.
        dynasty_id: Dynasty the proposer belongs to.
        credit: Proposer's credit in that dynasty.
        transactions: Ordered transactions; the empty marker is used when none.
        nonce: Proof-of-work nonce, zero for other protocols.

    Returns:
        The signed Block.
    """
    txs = tuple(transactions) or (EMPTY_MARKER,)
    header = BlockHeader(
        height=parent.height + 1,
        prev_hash=parent.hash,
        merkle_root=merkle_root([tx.id for tx in txs]),
        proposer_pk=keys.public,
        slot=slot,
        dynasty_id=dynasty_id,
        proposer_credit=credit,
        nonce=nonce,
    )
    return Block(
        header=header,
        transactions=txs,
        proposer_signature=keys.sign(header.canonical_bytes()),
    )


def structural_problem(
    block: Block, scheme: str | None = None, *, check_transactions: bool = True
) -> str | None:
    """
    Return a reason code for the first structural defect, or None.

    Checks the Merkle root, the proposer signature over the header and,
    optionally, every transaction signature. The genesis block is accepted
    only in its canonical form.
    """
    if block.height == 0:
        return None if block == genesis_block() else 'bad-genesis'
    if not block.transactions:
        return 'bad-merkle'
    if merkle_root([tx.id for tx in block.transactions]) != block.header.merkle_root:
        return 'bad-merkle'
    if not verify(
        block.header.proposer_pk,
        block.header.canonical_bytes(),
        block.proposer_signature,
        scheme,
    ):
        return 'bad-signature'
    if check_transactions and not all(
        verify_transaction(tx, scheme) for tx in block.transactions
    ):
        return 'bad-transaction'
    return None
