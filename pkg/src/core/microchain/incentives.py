"""Credit ledger with an audit log, and the per-epoch reward and penalty rules."""

from collections.abc import Iterable, Mapping
from enum import StrEnum

from pydantic import BaseModel, ConfigDict, Field


class CreditCause(StrEnum):
    BLOCK = 'block'
    VOTE = 'vote'
    EQUIVOCATION = 'equivocation'


class CreditEvent(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: str
    pk: bytes
    delta: int
    slot: int
    cause: CreditCause


class RewardPolicy(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    block_reward: int = Field(default=2, ge=0)
    vote_reward: int = Field(default=1, ge=0)
    slash_to_zero: bool = True


class EpochEvents(BaseModel):
    """What one finalized epoch earns or costs."""

    model_config = ConfigDict(frozen=True)

    slot: int = 0
    finalized_proposers: tuple[bytes, ...] = ()
    correct_voters: tuple[bytes, ...] = ()
    equivocators: frozenset[bytes] = frozenset()


class CreditLedger(BaseModel):
    model_config = ConfigDict(frozen=True)

    credits: dict[bytes, int] = Field(default_factory=dict)
    log: tuple[CreditEvent, ...] = ()

    @classmethod
    def from_roster(cls, roster: Mapping[bytes, int] | Iterable[tuple[bytes, int]]) -> 'CreditLedger':
        items = roster.items() if isinstance(roster, Mapping) else roster
        return cls(credits=dict(items))

    def credit_of(self, pk: bytes) -> int:
        return self.credits.get(pk, 0)

    @property
    def total(self) -> int:
        return sum(self.credits.values())


def apply_incentives(
    ledger: CreditLedger, events: EpochEvents, policy: RewardPolicy | None = None
) -> CreditLedger:
    """
    Reward finalized proposers and correct voters; slash equivocators.

    Equivocators are slashed to zero and receive no reward for the epoch.
    Every non-zero change is appended to the audit log; credits never go
    negative.
    """
    policy = policy or RewardPolicy()
    credits = dict(ledger.credits)
    log = list(ledger.log)

    def change(pk: bytes, delta: int, cause: CreditCause) -> None:
        delta = max(delta, -credits.get(pk, 0))
        if delta == 0:
            return
        credits[pk] = credits.get(pk, 0) + delta
        kind = 'reward' if delta > 0 else 'penalty'
        log.append(CreditEvent(kind=kind, pk=pk, delta=delta, slot=events.slot, cause=cause))

    for pk in events.finalized_proposers:
        if pk not in events.equivocators:
            change(pk, policy.block_reward, CreditCause.BLOCK)
    for pk in events.correct_voters:
        if pk not in events.equivocators:
            change(pk, policy.vote_reward, CreditCause.VOTE)
    if policy.slash_to_zero:
        for pk in sorted(events.equivocators):
            change(pk, -credits.get(pk, 0), CreditCause.EQUIVOCATION)
    return CreditLedger(credits=credits, log=tuple(log))
