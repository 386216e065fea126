"""Checkpoint votes, equivocation evidence and credit-weighted tallying."""

import logging
from collections import defaultdict
from collections.abc import Iterable
from enum import StrEnum
from typing import Any

from pydantic import BaseModel, ConfigDict, Field

from src.core.crypto import KeyPair, verify
from src.core.ledger import Checkpoint, ForkTree
from src.core.ledger.encoding import lp, u64
from src.core.microchain.dynasty import Dynasty

logger = logging.getLogger(__name__)


class Vote(BaseModel):
    model_config = ConfigDict(frozen=True)

    checkpoint: Checkpoint
    voter: bytes
    dynasty_id: int = Field(ge=0)
    signature: bytes = b''

    def signing_bytes(self) -> bytes:
        return b'vote' + self.checkpoint.canonical_bytes() + lp(self.voter) + u64(self.dynasty_id)

    def verify_signature(self, scheme: str | None = None) -> bool:
        return verify(self.voter, self.signing_bytes(), self.signature, scheme)


def sign_vote(keys: KeyPair, checkpoint: Checkpoint, dynasty_id: int) -> Vote:
    unsigned = Vote(checkpoint=checkpoint, voter=keys.public, dynasty_id=dynasty_id)
    return unsigned.model_copy(update={'signature': keys.sign(unsigned.signing_bytes())})


class EquivocationEvidence(BaseModel):
    """Two signed, conflicting statements by one validator in one epoch or slot."""

    model_config = ConfigDict(frozen=True)

    offender: bytes
    kind: str
    epoch: int
    first: bytes
    second: bytes

    def to_dict(self) -> dict[str, Any]:
        return {
            'offender': self.offender.hex(),
            'kind': self.kind,
            'epoch': self.epoch,
            'first': self.first.hex(),
            'second': self.second.hex(),
        }


def checkpoint_on(
    tree: ForkTree, head: bytes | None = None, epoch: int | None = None
) -> Checkpoint | None:
    """
    The epoch-boundary block on the chain ending at `head`, above finality.

    Without `epoch`, the latest boundary at or below the head is used.
    """
    block = tree.get(head or tree.longest_chain_head())
    if epoch is None:
        epoch = block.height // tree.epoch_length
    height = epoch * tree.epoch_length
    if epoch == 0 or height > block.height or height <= tree.finalized_height:
        return None
    return Checkpoint(block_hash=tree.ancestor_at(block.hash, height), epoch=epoch, height=height)


def cast_vote(
    keys: KeyPair, tree: ForkTree, dynasty: Dynasty, epoch: int | None = None
) -> Vote | None:
    """
    Vote for the checkpoint on this validator's fork-choice head.

    Returns None for non-members and when the head has not reached an
    unfinalized epoch boundary. Callers vote at most once per epoch; a second
    differing vote is equivocation.
    """
    if not dynasty.is_member(keys.public):
        return None
    checkpoint = checkpoint_on(tree, epoch=epoch)
    if checkpoint is None:
        return None
    return sign_vote(keys, checkpoint, dynasty.id)


class VoteBook:
    """First vote per (voter, epoch) plus any equivocation seen on top of it."""

    def __init__(self) -> None:
        self.first: dict[tuple[bytes, int], Vote] = {}
        self.votes: dict[int, list[Vote]] = defaultdict(list)
        self.evidence: dict[bytes, EquivocationEvidence] = {}

    def add(self, vote: Vote) -> EquivocationEvidence | None:
        """Record a vote; returns fresh evidence when it contradicts an earlier one."""
        key = (vote.voter, vote.checkpoint.epoch)
        earlier = self.first.get(key)
        if earlier is None:
            self.first[key] = vote
            self.votes[vote.checkpoint.epoch].append(vote)
            return None
        if earlier.checkpoint == vote.checkpoint:
            return None
        if any(v == vote for v in self.votes[vote.checkpoint.epoch]):
            return None
        self.votes[vote.checkpoint.epoch].append(vote)
        if vote.voter in self.evidence:
            return None
        evidence = EquivocationEvidence(
            offender=vote.voter,
            kind='double-vote',
            epoch=vote.checkpoint.epoch,
            first=earlier.checkpoint.block_hash,
            second=vote.checkpoint.block_hash,
        )
        self.evidence[vote.voter] = evidence
        return evidence

    def for_epoch(self, epoch: int) -> list[Vote]:
        return list(self.votes.get(epoch, []))


class TallyStatus(StrEnum):
    FINALIZED = 'finalized'
    PENDING = 'pending'
    CONFLICT = 'conflict'


class TallyResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    status: TallyStatus
    checkpoint: Checkpoint | None = None
    weights: dict[bytes, int] = Field(default_factory=dict)
    total_credit: int = 0
    conflicting: tuple[Checkpoint, ...] = ()
    discarded: dict[str, int] = Field(default_factory=dict)

    def evidence(self) -> dict[str, Any]:
        return {
            'checkpoints': [
                {'block': c.block_hash.hex(), 'epoch': c.epoch, 'height': c.height}
                for c in self.conflicting
            ],
            'weights': {h.hex(): w for h, w in self.weights.items()},
            'total_credit': self.total_credit,
        }


def vote_problem(vote: Vote, dynasty: Dynasty, scheme: str | None = None) -> str | None:
    if vote.dynasty_id != dynasty.id:
        return 'wrong-dynasty'
    if not dynasty.is_member(vote.voter):
        return 'not-member'
    if not vote.verify_signature(scheme):
        return 'bad-signature'
    return None


def tally_votes(
    votes: Iterable[Vote],
    dynasty: Dynasty,
    *,
    epoch: int | None = None,
    scheme: str | None = None,
) -> TallyResult:
    """
    Credit-weighted tally of checkpoint votes.

    A checkpoint finalizes when its voters hold strictly more than 2/3 of the
    dynasty's credit. A voter counts once per checkpoint, so a double voter
    supports both sides. Two checkpoints over the threshold in one epoch are
    reported as a conflict.

    Args:
        votes: Votes to count; invalid ones are discarded and counted by reason.
        dynasty: Dynasty whose credits weigh the votes.
        epoch: Count only this epoch; otherwise every epoch in `votes`.
        scheme: Signature scheme of the votes.
    """
    weights: dict[bytes, int] = defaultdict(int)
    checkpoints: dict[bytes, Checkpoint] = {}
    counted: set[tuple[bytes, bytes]] = set()
    discarded: dict[str, int] = defaultdict(int)
    for vote in votes:
        if epoch is not None and vote.checkpoint.epoch != epoch:
            continue
        reason = vote_problem(vote, dynasty, scheme)
        if reason is not None:
            discarded[reason] += 1
            continue
        key = (vote.voter, vote.checkpoint.block_hash)
        if key in counted:
            continue
        counted.add(key)
        checkpoints[vote.checkpoint.block_hash] = vote.checkpoint
        weights[vote.checkpoint.block_hash] += dynasty.credit_of(vote.voter)

    total = dynasty.total_credit
    winners = sorted(
        (checkpoints[h] for h, w in weights.items() if 3 * w > 2 * total),
        key=lambda c: (c.epoch, c.block_hash),
    )
    by_epoch: dict[int, list[Checkpoint]] = defaultdict(list)
    for checkpoint in winners:
        by_epoch[checkpoint.epoch].append(checkpoint)
    common = dict(weights=dict(weights), total_credit=total, discarded=dict(discarded))
    for group in by_epoch.values():
        if len(group) > 1:
            logger.warning('conflicting finality in epoch %d', group[0].epoch)
            return TallyResult(status=TallyStatus.CONFLICT, conflicting=tuple(group), **common)
    if winners:
        return TallyResult(status=TallyStatus.FINALIZED, checkpoint=winners[-1], **common)
    return TallyResult(status=TallyStatus.PENDING, **common)
