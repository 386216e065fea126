"""Tests for the network simulator: delay laws, determinism and adversaries."""

from typing import Any

import pytest

from src.core.netsim import (
    AdversarySpec,
    Crash,
    Deliver,
    Equivocate,
    Fire,
    Mark,
    Message,
    Outbound,
    SetTimer,
    Simulator,
    Start,
    SynchronyKind,
    SynchronyModel,
    TruncatedRun,
    UnknownRecipient,
    Withhold,
    adversary_transform,
    broadcast,
    run,
    send_to,
)
from src.core.rng import substream


class Ping(Message):
    TAG = 0x7E
    EQUIVOCABLE = 'value'

    round: int
    value: str


class PingNode:
    """Node 0 broadcasts `rounds` pings; everybody records what it got."""

    def __init__(self, node_id: int, rounds: int = 1, target: int | None = None) -> None:
        self.node_id = node_id
        self.rounds = rounds
        self.target = target
        self.received: list[tuple[int, str]] = []

    def step(self, event: Any) -> list:
        match event:
            case Start() if self.node_id == 0:
                if self.target is not None:
                    return [send_to(Ping(round=0, value='a'), self.target)]
                return [broadcast(Ping(round=r, value='a')) for r in range(self.rounds)]
            case Deliver(envelope=envelope):
                self.received.append((envelope.sender, envelope.payload.value))
                return [Mark(label='got', data={'value': envelope.payload.value})]
        return []

    def snapshot(self) -> dict[str, Any]:
        return {'received': len(self.received)}


class TickNode:
    """Re-arms one timer on each delivery; counts timer firings."""

    def __init__(self, node_id: int, ticks: int | None = None) -> None:
        self.node_id = node_id
        self.ticks = ticks
        self.fired: list[float] = []

    def step(self, event: Any) -> list:
        match event:
            case Start():
                return [SetTimer(name='tick', delay_ms=100.0)]
            case Fire(at=at):
                self.fired.append(at)
                if self.ticks is None or len(self.fired) < self.ticks:
                    return [SetTimer(name='tick', delay_ms=100.0)]
        return []

    def snapshot(self) -> dict[str, Any]:
        return {'fired': len(self.fired)}


def delays(model: SynchronyModel, count: int, now: float = 0.0) -> list[float]:
    rng = substream(7, 'network')
    return [model.propagation_delay(rng, now) for _ in range(count)]


def test_synchronous_delays_stay_within_delta():
    """Test that synchronous delays never exceed delta."""
    model = SynchronyModel(kind=SynchronyKind.SYNCHRONOUS, delta_ms=50.0, min_delay_ms=5.0)

    sample = delays(model, 10_000)

    assert max(sample) <= 50.0
    assert min(sample) >= 5.0


def test_partial_synchrony_after_gst_is_bounded():
    """Test that messages sent after GST arrive within delta."""
    model = SynchronyModel(kind=SynchronyKind.PARTIAL, delta_ms=40.0, gst_ms=1000.0)

    sample = delays(model, 10_000, now=1500.0)

    assert max(sample) <= 40.0


def test_partial_synchrony_before_gst_arrives_by_gst_plus_delta():
    """Test that pre-GST messages arrive no later than gst + delta."""
    model = SynchronyModel(kind=SynchronyKind.PARTIAL, delta_ms=40.0, gst_ms=1000.0)

    sample = delays(model, 10_000, now=900.0)

    assert max(sample) <= 1000.0 + 40.0 - 900.0


def test_asynchronous_delays_exceed_any_delta():
    """Test that the asynchronous model has no delay bound."""
    model = SynchronyModel(kind=SynchronyKind.ASYNCHRONOUS, delta_ms=100.0)

    sample = delays(model, 100_000)

    assert max(sample) > 100.0


def test_zero_nodes_give_empty_trace():
    """Test that a run with no nodes records nothing."""
    trace = run([], seed=1)

    assert len(trace) == 0
    assert trace.total_sent == 0


def test_same_seed_gives_identical_trace():
    """Test that identical inputs export byte-identical traces."""
    first = run([PingNode(i, rounds=3) for i in range(5)], seed=11).to_jsonl()
    second = run([PingNode(i, rounds=3) for i in range(5)], seed=11).to_jsonl()
    other = run([PingNode(i, rounds=3) for i in range(5)], seed=12).to_jsonl()

    assert first == second
    assert first != other


def test_broadcast_reaches_every_other_node():
    """Test that a broadcast is delivered once to each other node."""
    nodes = [PingNode(i) for i in range(4)]

    trace = run(nodes, seed=3)

    assert trace.sent['Ping'] == 3
    assert trace.delivered['Ping'] == 3
    assert all(len(node.received) == 1 for node in nodes[1:])
    assert nodes[0].received == []


def test_deliveries_are_time_ordered():
    """Test that delivery records never go back in time."""
    trace = run([PingNode(i, rounds=5) for i in range(6)], seed=5)

    times = [r.time for r in trace.records]
    assert times == sorted(times)
    assert trace.snapshots[1] == {'received': 5}


def test_withhold_sends_nothing():
    """Test that a withholding sender's messages never reach the network."""
    adversary = AdversarySpec(behaviors={0: Withhold()})

    trace = run([PingNode(i) for i in range(4)], adversary, seed=2)

    assert trace.sent['Ping'] == 0
    assert trace.dropped['Ping'] == 3
    assert {r.label for r in trace.of_kind('drop')} == {'withheld'}


def test_equivocation_gives_recipients_distinct_payloads():
    """Test that equivocation substitutes the payload per recipient."""
    adversary = AdversarySpec(behaviors={0: Equivocate(table={1: 'a', 2: 'r'})})
    nodes = [PingNode(i) for i in range(4)]

    run(nodes, adversary, seed=2)

    assert nodes[1].received == [(0, 'a')]
    assert nodes[2].received == [(0, 'r')]
    assert nodes[3].received == [(0, 'a')]


def test_adversary_transform_leaves_honest_senders_alone():
    """Test that honest traffic passes through unchanged."""
    adversary = AdversarySpec(behaviors={1: Withhold()})
    outbound = [Outbound(recipient=2, payload=Ping(round=0, value='a'))]

    result = adversary_transform(adversary, 0, outbound, 0.0, substream(0, 'adversary'))

    assert result == outbound


def test_crashed_node_drops_deliveries():
    """Test that a node crashed at t=0 receives nothing."""
    adversary = AdversarySpec(behaviors={1: Crash(at_ms=0.0)})
    nodes = [PingNode(i) for i in range(3)]

    trace = run(nodes, adversary, seed=4)

    assert nodes[1].received == []
    assert nodes[2].received == [(0, 'a')]
    assert [r.label for r in trace.of_kind('drop')] == ['crashed']


def test_unknown_recipient_raises():
    """Test that addressing an unregistered node is an error."""
    with pytest.raises(UnknownRecipient) as exc:
        run([PingNode(0, target=9), PingNode(1)], seed=0)

    assert exc.value.recipient == 9


def test_event_budget_truncates_run():
    """Test that an endless timer loop hits the event budget."""
    with pytest.raises(TruncatedRun) as exc:
        Simulator([TickNode(0)], seed=0, event_budget=50).run()

    assert exc.value.budget == 50
    assert len(exc.value.trace.of_kind('timer')) == 49


def test_rearming_a_timer_supersedes_the_old_one():
    """Test that only the latest arming of a timer fires."""

    class DoubleArm(TickNode):
        def step(self, event: Any) -> list:
            if isinstance(event, Start):
                return [SetTimer(name='tick', delay_ms=10.0), SetTimer(name='tick', delay_ms=30.0)]
            return super().step(event)

    node = DoubleArm(0, ticks=1)

    Simulator([node], seed=0).run()

    assert node.fired == [30.0]


def test_until_stops_the_clock():
    """Test that a run stops at the requested time."""
    node = TickNode(0)

    trace = Simulator([node], seed=0).run(until_ms=1000.0)

    assert len(node.fired) == 10
    assert trace.snapshots[0] == {'fired': 10}


def test_shared_medium_serialises_transmissions():
    """Test that one channel spaces deliveries by the airtime."""
    model = SynchronyModel(delta_ms=1.0, min_delay_ms=1.0, shared_medium=True, airtime_ms=50.0)

    trace = run([PingNode(i) for i in range(4)], model=model, seed=0)

    arrivals = sorted(r.time for r in trace.of_kind('deliver'))
    assert arrivals == [51.0, 101.0, 151.0]
