"""Dynasties (one epoch's final committee) and genesis initialisation."""

from collections.abc import Sequence

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.core.crypto import ZERO_DIGEST, Digest256
from src.core.ledger import Block, ForkTree, genesis_block
from src.core.ledger.forktree import DEFAULT_EPOCH_LENGTH
from src.core.microchain.errors import DuplicateValidator, EmptyValidatorSet

GENESIS_SEED = ZERO_DIGEST


class Member(BaseModel):
    model_config = ConfigDict(frozen=True)

    pk: bytes
    credit: int = Field(gt=0)


class Dynasty(BaseModel):
    """
    A committee with the credits it was selected with.

    Members are ordered by public key, so every node derives the same
    dynasty from the same inputs.
    """

    model_config = ConfigDict(frozen=True)

    id: int = Field(ge=0)
    members: tuple[Member, ...]
    seed: Digest256 = GENESIS_SEED
    start_height: int = Field(default=0, ge=0)

    @model_validator(mode='after')
    def _distinct_members(self) -> 'Dynasty':
        if not self.members:
            raise EmptyValidatorSet()
        seen: set[bytes] = set()
        for member in self.members:
            if member.pk in seen:
                raise DuplicateValidator(member.pk)
            seen.add(member.pk)
        return self

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def total_credit(self) -> int:
        return sum(m.credit for m in self.members)

    @property
    def pks(self) -> tuple[bytes, ...]:
        return tuple(m.pk for m in self.members)

    def is_member(self, pk: bytes) -> bool:
        return any(m.pk == pk for m in self.members)

    def credit_of(self, pk: bytes) -> int:
        """Credit of `pk` in this dynasty; 0 for non-members."""
        return next((m.credit for m in self.members if m.pk == pk), 0)

    def index_of(self, pk: bytes) -> int:
        """1-based position of a member, used as its secret-sharing index."""
        return self.pks.index(pk) + 1


def make_dynasty(
    validators: Sequence[tuple[bytes, int]],
    *,
    dynasty_id: int = 0,
    seed: bytes = GENESIS_SEED,
    start_height: int = 0,
) -> Dynasty:
    """Build a dynasty from (pk, credit) pairs; zero-credit entries are left out."""
    members = sorted(
        (Member(pk=pk, credit=credit) for pk, credit in validators if credit > 0),
        key=lambda m: m.pk,
    )
    return Dynasty(id=dynasty_id, members=tuple(members), seed=seed, start_height=start_height)


def genesis_init(
    validators: Sequence[tuple[bytes, int]],
    *,
    epoch_length: int = DEFAULT_EPOCH_LENGTH,
    scheme: str | None = None,
) -> tuple[Block, ForkTree, Dynasty]:
    """
    Create the genesis block, a fresh fork tree and the initial dynasty.

    Args:
        validators: (pk, credit) pairs; every listed validator joins dynasty 0.
        epoch_length: Blocks per epoch of the returned tree.
        scheme: Signature scheme the tree verifies blocks with.

    Returns:
        The genesis block, a tree whose head is genesis and dynasty 0.

    Raises:
        EmptyValidatorSet: If `validators` is empty or has no positive credit.
        DuplicateValidator: If a public key is listed twice.
    """
    if not validators:
        raise EmptyValidatorSet()
    pks = [pk for pk, _ in validators]
    for pk in pks:
        if pks.count(pk) > 1:
            raise DuplicateValidator(pk)
    dynasty = make_dynasty(validators)
    tree = ForkTree(epoch_length=epoch_length, scheme=scheme)
    return genesis_block(), tree, dynasty
