"""Adversarial behaviours applied to corrupted nodes' own outbound messages."""

from typing import Annotated, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.core.netsim.messages import Message


class Withhold(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    kind: Literal['withhold'] = 'withhold'


class Delay(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    kind: Literal['delay'] = 'delay'
    max_ms: float = Field(gt=0)


class Crash(BaseModel):
    """Stop the node at `at_ms`; optionally restart it at `recover_at_ms`."""

    model_config = ConfigDict(frozen=True, extra='forbid')

    kind: Literal['crash'] = 'crash'
    at_ms: float = Field(ge=0)
    recover_at_ms: float | None = None


class Equivocate(BaseModel):
    """Per-recipient payload substitution; recipients not in `table` get the original."""

    model_config = ConfigDict(frozen=True, extra='forbid')

    kind: Literal['equivocate'] = 'equivocate'
    table: dict[int, str]


Behavior = Annotated[Withhold | Delay | Crash | Equivocate, Field(discriminator='kind')]


class AdversarySpec(BaseModel):
    """Fixed set of corrupted nodes and what each does; honest traffic is never touched."""

    model_config = ConfigDict(frozen=True, extra='forbid')

    behaviors: dict[int, Behavior] = Field(default_factory=dict)

    @property
    def corrupted(self) -> frozenset[int]:
        return frozenset(self.behaviors)

    def crash_of(self, node_id: int) -> Crash | None:
        behavior = self.behaviors.get(node_id)
        return behavior if isinstance(behavior, Crash) else None


class Outbound(BaseModel):
    """One recipient-specific outbound message and its extra adversarial delay."""

    model_config = ConfigDict(frozen=True)

    recipient: int
    payload: Message
    extra_delay_ms: float = 0.0


def adversary_transform(
    spec: AdversarySpec,
    sender: int,
    outbound: list[Outbound],
    now: float,
    rng: np.random.Generator,
) -> list[Outbound]:
    """
    Apply the sender's behaviour to its own outbound messages.

    Honest senders pass through untouched.

    Args:
        spec: The run's adversary.
        sender: Node whose sends these are.
        outbound: Messages, one per recipient.
        now: Simulated send time in ms.
        rng: The adversary random stream.

    Returns:
        The messages actually handed to the network.
    """
    behavior = spec.behaviors.get(sender)
    match behavior:
        case None:
            return outbound
        case Withhold():
            return []
        case Crash(at_ms=at_ms, recover_at_ms=recover_at_ms):
            down = now >= at_ms and (recover_at_ms is None or now < recover_at_ms)
            return [] if down else outbound
        case Delay(max_ms=max_ms):
            return [
                item.model_copy(
                    update={'extra_delay_ms': float(rng.uniform(0.0, max_ms))}
                )
                for item in outbound
            ]
        case Equivocate(table=table):
            return [
                item.model_copy(update={'payload': item.payload.equivocate(table[item.recipient])})
                if item.recipient in table
                else item
                for item in outbound
            ]
    return outbound
