"""Envelopes, the events nodes receive and the effects they return."""

from typing import Any

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.core.netsim.messages import Message


class Envelope(BaseModel):
    """One scheduled point-to-point delivery; ordered by (deliver_at, msg_id)."""

    model_config = ConfigDict(frozen=True)

    msg_id: int
    sender: int
    recipient: int
    payload: Message
    sent_at: float
    deliver_at: float
    size: int = 0

    @model_validator(mode='after')
    def _not_before_send(self) -> 'Envelope':
        if self.deliver_at < self.sent_at:
            raise ValueError('deliver_at must not precede sent_at')
        return self


class Start(BaseModel):
    """First event of every node; `recovering` is set when a crashed node restarts."""

    model_config = ConfigDict(frozen=True)

    at: float = 0.0
    recovering: bool = False


class Deliver(BaseModel):
    model_config = ConfigDict(frozen=True)

    at: float
    envelope: Envelope


class Fire(BaseModel):
    """A timer owned by the receiving node has expired."""

    model_config = ConfigDict(frozen=True)

    at: float
    name: str
    data: Any = None


Event = Start | Deliver | Fire


class Send(BaseModel):
    """Send `payload` to the listed nodes, or to every other node when `to` is None."""

    model_config = ConfigDict(frozen=True)

    payload: Message
    to: tuple[int, ...] | None = None


class SetTimer(BaseModel):
    """Arm (or re-arm) the node's timer `name`."""

    model_config = ConfigDict(frozen=True)

    name: str
    delay_ms: float = Field(ge=0)
    data: Any = None


class CancelTimer(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str


class Mark(BaseModel):
    """A labelled phase marker recorded in the trace for metrics."""

    model_config = ConfigDict(frozen=True)

    label: str
    data: dict[str, Any] = Field(default_factory=dict)


class Halt(BaseModel):
    """Stop the whole run, e.g. on a detected safety breach."""

    model_config = ConfigDict(frozen=True)

    reason: str
    evidence: dict[str, Any] = Field(default_factory=dict)


Effect = Send | SetTimer | CancelTimer | Mark | Halt


def send_to(payload: Message, *recipients: int) -> Send:
    return Send(payload=payload, to=tuple(recipients))


def broadcast(payload: Message) -> Send:
    return Send(payload=payload, to=None)
