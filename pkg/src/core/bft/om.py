"""
Oral Messages agreement, OM(m), run as an exponential information gathering tree.

Every message carries the relay path it travelled: (0,) from the commander,
(0, i) when lieutenant i relays it, and so on up to m + 1 hops. A lieutenant
decides bottom-up over the paths it received, taking the majority at each
level; a missing or malformed value counts as RETREAT.
"""

import itertools
import logging
from collections.abc import Iterator, Mapping
from enum import IntEnum
from typing import Any, Self

from pydantic import BaseModel, ConfigDict, Field

from src.core.bft.quorum import majority
from src.core.netsim import (
    AdversarySpec,
    Deliver,
    Effect,
    Event,
    Fire,
    Mark,
    Message,
    SetTimer,
    Start,
    StateMachineNode,
    SynchronyModel,
    Trace,
    broadcast,
    run,
    send_to,
)
from src.core.rng import substream

logger = logging.getLogger(__name__)

COMMANDER = 0

Path = tuple[int, ...]


class Order(IntEnum):
    RETREAT = 0
    ATTACK = 1
    HOLD = 2


DEFAULT_ORDER = Order.RETREAT


def parse_order(value: str | int) -> Order:
    """Accept an order by name ('attack'), initial ('a') or number."""
    if isinstance(value, int) or value.isdigit():
        return Order(int(value))
    name = value.strip().upper()
    for order in Order:
        if order.name == name or order.name[0] == name:
            return order
    raise ValueError(f'Unknown order {value!r}')


class OmValue(Message):
    TAG = 0x01
    EQUIVOCABLE = 'value'

    path: Path
    value: int

    def equivocate(self, value: str) -> Self:
        return self.model_copy(update={'value': int(parse_order(value))})


class OmState(BaseModel):
    model_config = ConfigDict(frozen=True)

    node_id: int
    n: int
    depth: int
    decide_at_ms: float
    commander_value: int = DEFAULT_ORDER
    received: dict[Path, int] = Field(default_factory=dict)
    decision: int | None = None
    dropped: int = 0


def eig_decide(received: Mapping[Path, int], me: int, n: int, depth: int, path: Path = (COMMANDER,)) -> int:
    """
    Decision of lieutenant `me` for the sub-instance rooted at `path`.

    At the leaves (m = 0) the directly received value is used; above them the
    majority of the own value and every other lieutenant's relayed decision.
    """
    own = received.get(path, DEFAULT_ORDER)
    if len(path) > depth:
        return own
    relayed = [
        eig_decide(received, me, n, depth, (*path, j))
        for j in range(n)
        if j not in path and j != me
    ]
    return majority([own, *relayed])


def _valid_path(state: OmState, sender: int, path: Path) -> bool:
    return (
        0 < len(path) <= state.depth + 1
        and path[0] == COMMANDER
        and path[-1] == sender
        and state.node_id not in path
        and len(set(path)) == len(path)
        and all(0 <= p < state.n for p in path)
    )


def om_step(state: OmState, event: Event) -> tuple[OmState, list[Effect]]:
    """Transition function of one general."""
    match event:
        case Start():
            if state.node_id == COMMANDER:
                payload = OmValue(path=(COMMANDER,), value=state.commander_value)
                mark = Mark(label='om_decided', data={'value': state.commander_value})
                return state.model_copy(update={'decision': state.commander_value}), [
                    broadcast(payload),
                    mark,
                ]
            return state, [SetTimer(name='decide', delay_ms=state.decide_at_ms)]
        case Deliver(envelope=envelope):
            payload = envelope.payload
            if not isinstance(payload, OmValue) or not _valid_path(
                state, envelope.sender, payload.path
            ):
                return state.model_copy(update={'dropped': state.dropped + 1}), []
            if payload.path in state.received:
                return state, []
            value = payload.value if payload.value in Order else DEFAULT_ORDER
            received = {**state.received, payload.path: value}
            effects: list[Effect] = []
            if len(payload.path) <= state.depth:
                relay_path = (*payload.path, state.node_id)
                targets = [j for j in range(state.n) if j not in relay_path]
                if targets:
                    effects.append(send_to(OmValue(path=relay_path, value=value), *targets))
            return state.model_copy(update={'received': received}), effects
        case Fire(name='decide') if state.node_id != COMMANDER:
            decision = eig_decide(state.received, state.node_id, state.n, state.depth)
            return state.model_copy(update={'decision': decision}), [
                Mark(label='om_decided', data={'value': decision})
            ]
    return state, []


def om_depth(n: int, f: int) -> int:
    """Recursion depth: f when n > 3f, else the deepest depth n can support."""
    return f if n > 3 * f else max(0, (n - 1) // 3)


def om_message_count(n: int, depth: int) -> int:
    """Messages sent by OM(depth) among n generals: sum over k of (n-1)(n-2)...(n-k)."""
    total, product = 0, 1
    for k in range(1, depth + 2):
        product *= n - k
        total += product
    return total


class OmOutcome(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int
    f: int
    depth: int
    agreement_possible: bool
    commander_value: int
    commander_loyal: bool
    decisions: dict[int, int | None]
    messages: int
    expected_messages: int
    trace: Trace | None = None

    @property
    def agreed(self) -> bool:
        return len(set(self.decisions.values())) <= 1

    @property
    def valid(self) -> bool:
        """Loyal lieutenants obey a loyal commander."""
        if not self.commander_loyal:
            return True
        return all(value == self.commander_value for value in self.decisions.values())


def om_run(
    n: int,
    f: int,
    commander_value: int = Order.ATTACK,
    adversary: AdversarySpec | None = None,
    model: SynchronyModel | None = None,
    seed: int = 0,
) -> OmOutcome:
    """
    Run OM over the simulator and collect every loyal lieutenant's decision.

    With n <= 3f the run still happens, at depth (n-1)//3, and the outcome
    reports agreement_possible=False.

    Args:
        n: Number of generals; node 0 is the commander.
        f: Number of traitors the run is meant to tolerate.
        commander_value: The commander's order.
        adversary: Traitors and their behaviour.
        model: Network model; should be synchronous for the guarantees to hold.
        seed: Run seed.

    Returns:
        An OmOutcome with decisions, the measured and the closed-form message count.
    """
    adversary = adversary or AdversarySpec()
    model = model or SynchronyModel()
    depth = om_depth(n, f)
    decide_at = (depth + 1) * (model.delta_ms + model.transfer_ms(64)) + 1.0
    nodes = [
        StateMachineNode(
            i,
            OmState(
                node_id=i,
                n=n,
                depth=depth,
                decide_at_ms=decide_at,
                commander_value=int(commander_value),
            ),
            om_step,
            lambda s: {'decision': s.decision, 'received': len(s.received)},
        )
        for i in range(n)
    ]
    trace = run(nodes, adversary, model, seed)
    loyal = [i for i in range(1, n) if i not in adversary.corrupted]
    outcome = OmOutcome(
        n=n,
        f=f,
        depth=depth,
        agreement_possible=n > 3 * f,
        commander_value=int(commander_value),
        commander_loyal=COMMANDER not in adversary.corrupted,
        decisions={i: nodes[i].state.decision for i in loyal},
        messages=trace.sent['OmValue'],
        expected_messages=om_message_count(n, depth),
        trace=trace,
    )
    logger.info(
        'OM n=%d f=%d depth=%d: agreed=%s messages=%d', n, f, depth, outcome.agreed, outcome.messages
    )
    return outcome


def eig_paths(n: int, depth: int) -> Iterator[Path]:
    """Every relay path in breadth-first order, parents before children."""
    level: list[Path] = [(COMMANDER,)]
    while level:
        yield from level
        if len(level[0]) > depth:
            return
        level = [(*p, j) for p in level for j in range(n) if j not in p]


Strategy = Mapping[tuple[Path, int], int]


def om_decisions(
    n: int,
    depth: int,
    commander_value: int,
    traitors: frozenset[int],
    strategy: Strategy,
) -> dict[int, int]:
    """
    Evaluate OM without the network: every message arrives.

    A traitor sending along `path` to `recipient` sends strategy[(path,
    recipient)] when present, else the value an honest general would send.
    """
    received: dict[int, dict[Path, int]] = {i: {} for i in range(1, n)}
    for path in eig_paths(n, depth):
        sender = path[-1]
        honest = commander_value if sender == COMMANDER else received[sender][path[:-1]]
        for recipient in range(n):
            if recipient in path:
                continue
            value = honest
            if sender in traitors:
                value = strategy.get((path, recipient), honest)
            received[recipient][path] = value
    return {
        i: eig_decide(received[i], i, n, depth)
        for i in range(1, n)
        if i not in traitors
    }


class OmWitness(BaseModel):
    """An adversary strategy that breaks agreement or validity."""

    model_config = ConfigDict(frozen=True)

    traitors: tuple[int, ...]
    commander_value: int
    strategy: dict[str, int]
    decisions: dict[int, int]


def _violates(decisions: dict[int, int], commander_value: int, commander_loyal: bool) -> bool:
    values = set(decisions.values())
    if len(values) > 1:
        return True
    return commander_loyal and bool(values) and values != {commander_value}


def om_search(
    n: int,
    f: int,
    *,
    domain: tuple[int, ...] = tuple(Order),
    limit: int = 100_000,
    samples: int = 2_000,
    seed: int = 0,
) -> OmWitness | None:
    """
    Look for a message-substitution strategy that defeats OM.

    Every set of f traitors and every commander value is tried. When a
    traitor set has at most `limit` strategies all of them are enumerated;
    otherwise `samples` strategies are drawn from the adversary stream.

    Returns:
        The first violating strategy found, or None.
    """
    depth = om_depth(n, f)
    rng = substream(seed, 'adversary')
    for traitors in itertools.combinations(range(n), f):
        corrupt = frozenset(traitors)
        slots = [
            (path, r)
            for path in eig_paths(n, depth)
            if path[-1] in corrupt
            for r in range(n)
            if r not in path
        ]
        total = len(domain) ** len(slots)
        for commander_value in domain:
            if total <= limit:
                choices: Any = itertools.product(domain, repeat=len(slots))
            else:
                choices = (
                    tuple(domain[k] for k in rng.integers(0, len(domain), len(slots)))
                    for _ in range(samples)
                )
            for choice in choices:
                strategy = dict(zip(slots, choice, strict=True))
                decisions = om_decisions(n, depth, commander_value, corrupt, strategy)
                if _violates(decisions, commander_value, COMMANDER not in corrupt):
                    return OmWitness(
                        traitors=traitors,
                        commander_value=commander_value,
                        strategy={
                            f'{"-".join(map(str, path))}>{r}': v
                            for (path, r), v in strategy.items()
                        },
                        decisions=decisions,
                    )
    return None
