"""Deterministic discrete-event loop hosting protocol nodes."""

import heapq
import logging
from collections.abc import Iterable, Sequence
from enum import IntEnum
from typing import Any

import numpy as np

from src.core.netsim.adversary import AdversarySpec, Outbound, adversary_transform
from src.core.netsim.errors import DuplicateNode, TruncatedRun, UnknownRecipient
from src.core.netsim.events import (
    CancelTimer,
    Deliver,
    Effect,
    Envelope,
    Fire,
    Halt,
    Mark,
    Send,
    SetTimer,
    Start,
)
from src.core.netsim.messages import Message
from src.core.netsim.model import SynchronyModel
from src.core.netsim.node import ProtocolNode
from src.core.netsim.trace import Trace
from src.core.rng import substream

logger = logging.getLogger(__name__)

DEFAULT_EVENT_BUDGET = 2_000_000


class _Action(IntEnum):
    DELIVER = 0
    FIRE = 1
    CRASH = 2
    RECOVER = 3
    START = 4


class Network:
    """
    Turns sends into scheduled envelopes under a synchrony model.

    Message ids come from one counter, so delivery order (deliver_at, msg_id)
    is total.
    """

    def __init__(self, model: SynchronyModel, rng: np.random.Generator) -> None:
        self.model = model
        self.rng = rng
        self.channel_free_at = 0.0
        self._next_id = 0

    def next_id(self) -> int:
        self._next_id += 1
        return self._next_id

    def send(
        self,
        sender: int,
        recipients: Iterable[int],
        payload: Message,
        now: float,
        *,
        size: int | None = None,
        extra_delay_ms: float = 0.0,
    ) -> list[Envelope]:
        """
        Schedule one envelope per recipient, each with an independent delay.

        Args:
            sender: Sending node id.
            recipients: Target node ids; a broadcast is already expanded.
            payload: The message.
            now: Send time in ms.
            size: Encoded size in bytes (computed when omitted).
            extra_delay_ms: Adversarial delay added on top of the model.

        Returns:
            The scheduled envelopes in msg_id order.
        """
        size = len(payload.encoded()) if size is None else size
        transfer = self.model.transfer_ms(size)
        envelopes = []
        for recipient in recipients:
            if self.model.shared_medium:
                start = max(now, self.channel_free_at)
                departs = start + self.model.airtime_ms + transfer
                self.channel_free_at = departs
            else:
                departs = now + transfer
            delay = self.model.propagation_delay(self.rng, now)
            envelopes.append(
                Envelope(
                    msg_id=self.next_id(),
                    sender=sender,
                    recipient=recipient,
                    payload=payload,
                    sent_at=now,
                    deliver_at=departs + delay + extra_delay_ms,
                    size=size,
                )
            )
        return envelopes


class Simulator:
    """
    Runs registered nodes to a stop condition and records a Trace.

    All randomness comes from named sub-streams of `seed`, so identical
    (nodes, adversary, model, seed) give byte-identical traces.
    """

    def __init__(
        self,
        nodes: Sequence[ProtocolNode],
        model: SynchronyModel | None = None,
        seed: int = 0,
        adversary: AdversarySpec | None = None,
        *,
        event_budget: int = DEFAULT_EVENT_BUDGET,
        snapshot_labels: Iterable[str] = (),
        record_timers: bool = True,
    ) -> None:
        self.nodes: dict[int, ProtocolNode] = {}
        for node in nodes:
            if node.node_id in self.nodes:
                raise DuplicateNode(node.node_id)
            self.nodes[node.node_id] = node
        self.model = model or SynchronyModel()
        self.seed = seed
        self.adversary = adversary or AdversarySpec()
        self.network = Network(self.model, substream(seed, 'network'))
        self._adversary_rng = substream(seed, 'adversary')
        self.event_budget = event_budget
        self.snapshot_labels = frozenset(snapshot_labels)
        self.record_timers = record_timers
        self.trace = Trace()
        self.now = 0.0
        self._queue: list[tuple[float, int, int, int, Any]] = []
        self._seq = 0
        self._timer_generation: dict[tuple[int, str], int] = {}
        self._down: set[int] = set()

    def _push(self, at: float, action: _Action, node_id: int, item: Any) -> None:
        self._seq += 1
        heapq.heappush(self._queue, (at, self._seq, action, node_id, item))

    def run(self, until_ms: float | None = None) -> Trace:
        """
        Pop events in (time, sequence) order until quiescence, `until_ms` or a Halt.

        Raises:
            TruncatedRun: If more than `event_budget` events are processed.
        """
        for node_id in sorted(self.nodes):
            self._push(0.0, _Action.START, node_id, False)
            crash = self.adversary.crash_of(node_id)
            if crash is not None:
                self._push(crash.at_ms, _Action.CRASH, node_id, None)
                if crash.recover_at_ms is not None:
                    self._push(crash.recover_at_ms, _Action.RECOVER, node_id, None)

        processed = 0
        last_time = 0.0
        while self._queue and self.trace.halted is None:
            if until_ms is not None and self._queue[0][0] > until_ms:
                break
            at, _, action, node_id, item = heapq.heappop(self._queue)
            assert at >= last_time, 'event queue popped out of order'
            last_time = self.now = at
            processed += 1
            if processed > self.event_budget:
                raise TruncatedRun(self.trace, self.event_budget)
            self._handle(action, node_id, item)

        if until_ms is not None and self._queue and self.trace.halted is None:
            self.now = until_ms
        for node_id in sorted(self.nodes):
            snapshot = self.nodes[node_id].snapshot()
            self.trace.snapshots[node_id] = snapshot
            self.trace.add(
                time=self.now, kind='snapshot', sender=node_id, label='final', data=snapshot
            )
        logger.debug(
            'run finished at %.3f ms after %d events, %d messages',
            self.now,
            processed,
            self.trace.total_sent,
        )
        return self.trace

    def _handle(self, action: _Action, node_id: int, item: Any) -> None:
        node = self.nodes[node_id]
        match action:
            case _Action.DELIVER:
                envelope: Envelope = item
                if node_id in self._down:
                    self._record_envelope('drop', envelope, label='crashed')
                    return
                self._record_envelope('deliver', envelope)
                self._apply(node_id, node.step(Deliver(at=self.now, envelope=envelope)))
            case _Action.FIRE:
                name, generation, data = item
                if node_id in self._down or self._timer_generation.get((node_id, name)) != generation:
                    return
                if self.record_timers:
                    self.trace.add(time=self.now, kind='timer', sender=node_id, label=name)
                self._apply(node_id, node.step(Fire(at=self.now, name=name, data=data)))
            case _Action.CRASH:
                self._down.add(node_id)
                self._invalidate_timers(node_id)
                self.trace.add(time=self.now, kind='crash', sender=node_id)
                logger.info('node %d crashed at %.3f ms', node_id, self.now)
            case _Action.RECOVER:
                self._down.discard(node_id)
                self.trace.add(time=self.now, kind='recover', sender=node_id)
                self._apply(node_id, node.step(Start(at=self.now, recovering=True)))
            case _Action.START:
                if node_id not in self._down:
                    self._apply(node_id, node.step(Start(at=self.now)))

    def _invalidate_timers(self, node_id: int) -> None:
        for key in [k for k in self._timer_generation if k[0] == node_id]:
            self._timer_generation[key] += 1

    def _apply(self, node_id: int, effects: list[Effect]) -> None:
        for effect in effects:
            match effect:
                case Send():
                    self._dispatch(node_id, effect)
                case SetTimer(name=name, delay_ms=delay_ms, data=data):
                    generation = self._timer_generation.get((node_id, name), 0) + 1
                    self._timer_generation[(node_id, name)] = generation
                    self._push(self.now + delay_ms, _Action.FIRE, node_id, (name, generation, data))
                case CancelTimer(name=name):
                    key = (node_id, name)
                    self._timer_generation[key] = self._timer_generation.get(key, 0) + 1
                case Mark(label=label, data=data):
                    self.trace.add(
                        time=self.now, kind='mark', sender=node_id, label=label, data=data
                    )
                    if label in self.snapshot_labels:
                        self.trace.add(
                            time=self.now,
                            kind='snapshot',
                            sender=node_id,
                            label=label,
                            data=self.nodes[node_id].snapshot(),
                        )
                case Halt(reason=reason, evidence=evidence):
                    self.trace.halted = reason
                    self.trace.evidence = evidence
                    self.trace.add(
                        time=self.now, kind='halt', sender=node_id, label=reason, data=evidence
                    )
                    logger.info('run halted by node %d: %s', node_id, reason)
                    return

    def _dispatch(self, node_id: int, send: Send) -> None:
        if send.to is None:
            recipients = [peer for peer in sorted(self.nodes) if peer != node_id]
        else:
            recipients = list(send.to)
            for recipient in recipients:
                if recipient not in self.nodes:
                    raise UnknownRecipient(node_id, recipient)

        outbound = [Outbound(recipient=r, payload=send.payload) for r in recipients]
        if node_id in self.adversary.corrupted:
            transformed = adversary_transform(
                self.adversary, node_id, outbound, self.now, self._adversary_rng
            )
            if not transformed:
                for item in outbound:
                    self.trace.add(
                        time=self.now,
                        kind='drop',
                        sender=node_id,
                        recipient=item.recipient,
                        tag=item.payload.TAG,
                        msg=item.payload.kind(),
                        label='withheld',
                    )
                    self.trace.dropped[item.payload.kind()] += 1
            outbound = transformed

        node = self.nodes[node_id]
        encoded: dict[int, tuple[int, str]] = {}
        for item in outbound:
            payload = item.payload
            if payload is not send.payload and hasattr(node, 'sign_payload'):
                payload = node.sign_payload(payload)
            key = id(payload)
            if key not in encoded:
                data = payload.encoded()
                encoded[key] = (len(data), payload.digest().hex())
            size, digest = encoded[key]
            for envelope in self.network.send(
                node_id,
                [item.recipient],
                payload,
                self.now,
                size=size,
                extra_delay_ms=item.extra_delay_ms,
            ):
                self._record_envelope('send', envelope, digest=digest)
                self._push(envelope.deliver_at, _Action.DELIVER, envelope.recipient, envelope)

    def _record_envelope(
        self, kind: str, envelope: Envelope, *, digest: str | None = None, label: str | None = None
    ) -> None:
        name = envelope.payload.kind()
        self.trace.add(
            time=self.now,
            kind=kind,
            sender=envelope.sender,
            recipient=envelope.recipient,
            tag=envelope.payload.TAG,
            msg=name,
            size=envelope.size,
            hash=digest,
            label=label,
            data={'id': envelope.msg_id},
        )
        counter = {'send': self.trace.sent, 'deliver': self.trace.delivered, 'drop': self.trace.dropped}
        counter[kind][name] += 1


def run(
    nodes: Sequence[ProtocolNode],
    adversary: AdversarySpec | None = None,
    model: SynchronyModel | None = None,
    seed: int = 0,
    *,
    until_ms: float | None = None,
    event_budget: int = DEFAULT_EVENT_BUDGET,
    snapshot_labels: Iterable[str] = (),
) -> Trace:
    """Build a Simulator and run it; see Simulator.run."""
    simulator = Simulator(
        nodes,
        model,
        seed,
        adversary,
        event_budget=event_budget,
        snapshot_labels=snapshot_labels,
    )
    return simulator.run(until_ms)
