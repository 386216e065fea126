"""
Proof-of-Credit block proposal.

A committee member gets exactly one eligibility evaluation per slot:
hash(head ‖ slot ‖ pk ‖ credit), read as a 64-bit integer, must not exceed a
target proportional to its share of the dynasty's credit.
"""

import math
from collections.abc import Callable, Sequence
from fractions import Fraction

from pydantic import BaseModel, ConfigDict

from src.core.crypto import KeyPair, hash_concat, leading_u64, u64
from src.core.ledger import Block, ForkTree, Transaction, build_block, structural_problem
from src.core.microchain.dynasty import Dynasty
from src.core.microchain.errors import InvalidPocParameters

TARGET_BITS = 64
DEFAULT_RHO = 1.0
MAX_SLOT_LAG = 2


def poc_target(credit: int, total_credit: int, rho: float = DEFAULT_RHO, bits: int = TARGET_BITS) -> int:
    """
    Eligibility threshold floor((2^bits - 1) * rho * credit / total), clamped.

    Raises:
        InvalidPocParameters: If total is not positive, rho is not positive or
            credit lies outside [0, total].
    """
    if total_credit <= 0 or rho <= 0 or not 0 <= credit <= total_credit:
        raise InvalidPocParameters(credit, total_credit, rho)
    ceiling = (1 << bits) - 1
    value = math.floor(ceiling * Fraction(rho) * credit / total_credit)
    return min(value, ceiling)


def eligibility_value(head_hash: bytes, slot: int, pk: bytes, credit: int) -> int:
    return leading_u64(hash_concat(head_hash, u64(slot), pk, u64(credit)))


def poc_eligible(
    head_hash: bytes, slot: int, pk: bytes, dynasty: Dynasty, rho: float = DEFAULT_RHO
) -> bool:
    credit = dynasty.credit_of(pk)
    if credit == 0:
        return False
    target = poc_target(credit, dynasty.total_credit, rho)
    return eligibility_value(head_hash, slot, pk, credit) <= target


class PocAttempt(BaseModel):
    """Outcome of one proposal attempt; `violation` flags a forbidden attempt."""

    model_config = ConfigDict(frozen=True)

    slot: int
    eligible: bool = False
    block: Block | None = None
    violation: str | None = None


def poc_try_propose(
    keys: KeyPair,
    head: Block,
    slot: int,
    dynasty: Dynasty,
    pending_txs: Sequence[Transaction] | Callable[[], Sequence[Transaction]] = (),
    *,
    rho: float = DEFAULT_RHO,
    last_slot: int | None = None,
) -> PocAttempt:
    """
    Evaluate eligibility once and, when eligible, build the signed block.

    Args:
        keys: The validator's key pair.
        head: The fork-choice head to extend.
        slot: Current slot.
        dynasty: The dynasty in charge.
        pending_txs: Transactions to include, in order, or a callable producing
            them; the callable runs only when the member is eligible.
        rho: Expected number of eligible members per slot.
        last_slot: Slot of this validator's previous evaluation, if any.

    Returns:
        PocAttempt with the block on success. A non-member gets the
        'not-member' violation; a second evaluation in a slot (or an older
        slot) gets 'grinding' and is not evaluated.
    """
    if not dynasty.is_member(keys.public):
        return PocAttempt(slot=slot, violation='not-member')
    if last_slot is not None and slot <= last_slot:
        return PocAttempt(slot=slot, violation='grinding')
    if not poc_eligible(head.hash, slot, keys.public, dynasty, rho):
        return PocAttempt(slot=slot)
    block = build_block(
        keys,
        head,
        slot=slot,
        dynasty_id=dynasty.id,
        credit=dynasty.credit_of(keys.public),
        transactions=pending_txs() if callable(pending_txs) else pending_txs,
    )
    return PocAttempt(slot=slot, eligible=True, block=block)


def verify_block_poc(
    block: Block,
    dynasty: Dynasty,
    tree: ForkTree,
    *,
    rho: float = DEFAULT_RHO,
    current_slot: int | None = None,
    max_slot_lag: int = MAX_SLOT_LAG,
    scheme: str | None = None,
) -> str | None:
    """
    Re-derive a block's proposal right.

    A block is only acceptable in its own slot, up to `max_slot_lag` slots
    late. One from a slot after `current_slot` is stale-slot too: nobody may
    evaluate eligibility ahead of time.

    Returns:
        None when the block is acceptable, otherwise one of the reasons
        unknown-parent, bad-merkle, bad-signature, bad-transaction,
        not-member, stale-slot, not-eligible.
    """
    if block.parent not in tree:
        return 'unknown-parent'
    problem = structural_problem(block, scheme or tree.scheme, check_transactions=tree.check_transactions)
    if problem is not None:
        return problem
    header = block.header
    if header.dynasty_id != dynasty.id or not dynasty.is_member(header.proposer_pk):
        return 'not-member'
    parent = tree.get(block.parent)
    if header.slot <= parent.header.slot:
        return 'stale-slot'
    if current_slot is not None and not current_slot - max_slot_lag <= header.slot <= current_slot:
        return 'stale-slot'
    credit = dynasty.credit_of(header.proposer_pk)
    if header.proposer_credit != credit:
        return 'not-eligible'
    target = poc_target(credit, dynasty.total_credit, rho)
    if eligibility_value(block.parent, header.slot, header.proposer_pk, credit) > target:
        return 'not-eligible'
    return None
