"""
Viewstamped Replication: normal operation, view change and recovery.

Replicas 0..n-1 run `vr_step`; clients are nodes with ids >= n running
`vr_client_step`. The primary of view v is replica v mod n. The primary
commits an operation once f backups acknowledged it (an acknowledgement of
op k covers every op up to k) and replies to the client; backups learn
commits from later Prepares and from periodic Commit heartbeats.
"""

import logging
from collections.abc import Iterable, Sequence
from enum import StrEnum
from typing import Any

from pydantic import BaseModel, ConfigDict, Field

from src.core.netsim import (
    AdversarySpec,
    CancelTimer,
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
    run,
    send_to,
)

logger = logging.getLogger(__name__)


class VrStatus(StrEnum):
    NORMAL = 'normal'
    VIEW_CHANGE = 'view-change'
    RECOVERING = 'recovering'


class VrEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    client: int
    request_id: int
    op: str


class VrRequest(Message):
    TAG = 0x10

    client: int
    request_id: int
    op: str


class VrPrepare(Message):
    TAG = 0x11

    view: int
    op_number: int
    commit_number: int
    entry: VrEntry


class VrPrepareOk(Message):
    TAG = 0x12

    view: int
    op_number: int
    replica: int


class VrReply(Message):
    TAG = 0x13

    view: int
    request_id: int
    result: str
    replica: int


class VrCommit(Message):
    """Heartbeat carrying the primary's commit number."""

    TAG = 0x14

    view: int
    commit_number: int


class VrStartViewChange(Message):
    TAG = 0x15

    view: int
    replica: int


class VrDoViewChange(Message):
    TAG = 0x16

    view: int
    log: tuple[VrEntry, ...]
    last_normal_view: int
    op_number: int
    commit_number: int
    replica: int


class VrStartView(Message):
    TAG = 0x17

    view: int
    log: tuple[VrEntry, ...]
    commit_number: int


class VrRecovery(Message):
    TAG = 0x18

    replica: int
    nonce: int


class VrRecoveryResponse(Message):
    TAG = 0x19

    view: int
    nonce: int
    log: tuple[VrEntry, ...]
    commit_number: int
    replica: int
    primary: bool


class VrReplicaState(BaseModel):
    model_config = ConfigDict(frozen=True)

    replica: int
    n: int
    f: int
    timeout_ms: float
    heartbeat_ms: float
    view: int = 0
    status: VrStatus = VrStatus.NORMAL
    last_normal_view: int = 0
    log: tuple[VrEntry, ...] = ()
    commit_number: int = 0
    executed: tuple[str, ...] = ()
    acked: dict[int, int] = Field(default_factory=dict)
    pending: dict[int, VrPrepare] = Field(default_factory=dict)
    client_table: dict[int, tuple[int, str | None]] = Field(default_factory=dict)
    start_view_changes: frozenset[int] = frozenset()
    do_view_changes: dict[int, VrDoViewChange] = Field(default_factory=dict)
    sent_do_view_change: bool = False
    recovery_nonce: int = 0
    recovery_responses: dict[int, VrRecoveryResponse] = Field(default_factory=dict)
    dropped: dict[str, int] = Field(default_factory=dict)

    @property
    def op_number(self) -> int:
        return len(self.log)

    @property
    def primary(self) -> int:
        return self.view % self.n

    @property
    def is_primary(self) -> bool:
        return self.primary == self.replica

    @property
    def others(self) -> tuple[int, ...]:
        return tuple(r for r in range(self.n) if r != self.replica)


Step = tuple[VrReplicaState, list[Effect]]


def op_result(entry: VrEntry, op_number: int) -> str:
    return f'{entry.op}@{op_number}'


def _drop(state: VrReplicaState, reason: str) -> Step:
    dropped = {**state.dropped, reason: state.dropped.get(reason, 0) + 1}
    return state.model_copy(update={'dropped': dropped}), []


def _client_table(log: Sequence[VrEntry], executed: int) -> dict[int, tuple[int, str | None]]:
    table: dict[int, tuple[int, str | None]] = {}
    for k, entry in enumerate(log, start=1):
        table[entry.client] = (entry.request_id, op_result(entry, k) if k <= executed else None)
    return table


def _execute(state: VrReplicaState, upto: int) -> tuple[VrReplicaState, list[Effect]]:
    """Execute committed ops in order; the primary replies to their clients."""
    upto = min(upto, state.op_number)
    if upto <= len(state.executed):
        return state, []
    executed = list(state.executed)
    table = dict(state.client_table)
    effects: list[Effect] = []
    for k in range(len(executed) + 1, upto + 1):
        entry = state.log[k - 1]
        result = op_result(entry, k)
        executed.append(entry.op)
        table[entry.client] = (entry.request_id, result)
        if state.is_primary and state.status == VrStatus.NORMAL:
            reply = VrReply(
                view=state.view, request_id=entry.request_id, result=result, replica=state.replica
            )
            effects.append(send_to(reply, entry.client))
    effects.append(Mark(label='vr_executed', data={'commit': upto}))
    updated = state.model_copy(
        update={
            'executed': tuple(executed),
            'commit_number': max(state.commit_number, upto),
            'client_table': table,
        }
    )
    return updated, effects


def _view_change_timer(state: VrReplicaState, factor: float = 1.0) -> SetTimer:
    return SetTimer(name='view-change', delay_ms=state.timeout_ms * factor)


def _begin_view_change(state: VrReplicaState, view: int) -> Step:
    logger.debug('replica %d starts view change to %d', state.replica, view)
    updated = state.model_copy(
        update={
            'view': view,
            'status': VrStatus.VIEW_CHANGE,
            'last_normal_view': state.view
            if state.status == VrStatus.NORMAL
            else state.last_normal_view,
            'start_view_changes': frozenset(),
            'do_view_changes': {},
            'sent_do_view_change': False,
            'acked': {},
        }
    )
    return updated, [
        send_to(VrStartViewChange(view=view, replica=state.replica), *state.others),
        CancelTimer(name='heartbeat'),
        _view_change_timer(state, 2.0),
    ]


def _maybe_do_view_change(state: VrReplicaState) -> Step:
    if state.sent_do_view_change or len(state.start_view_changes) < state.f:
        return state, []
    message = VrDoViewChange(
        view=state.view,
        log=state.log,
        last_normal_view=state.last_normal_view,
        op_number=state.op_number,
        commit_number=state.commit_number,
        replica=state.replica,
    )
    state = state.model_copy(update={'sent_do_view_change': True})
    if state.is_primary:
        state = state.model_copy(
            update={'do_view_changes': {**state.do_view_changes, state.replica: message}}
        )
        return _maybe_start_view(state)
    return state, [send_to(message, state.primary)]


def _adopt_log(
    state: VrReplicaState, view: int, log: tuple[VrEntry, ...], commit_number: int
) -> Step:
    executed = state.executed
    if log[: len(executed)] != state.log[: len(executed)]:
        executed = ()
    state = state.model_copy(
        update={
            'view': view,
            'status': VrStatus.NORMAL,
            'last_normal_view': view,
            'log': log,
            'executed': executed,
            'commit_number': len(executed),
            'pending': {},
            'acked': {},
            'client_table': _client_table(log, len(executed)),
            'start_view_changes': frozenset(),
            'do_view_changes': {},
            'sent_do_view_change': False,
        }
    )
    return _execute(state, commit_number)


def _maybe_start_view(state: VrReplicaState) -> Step:
    dvcs = state.do_view_changes
    if len(dvcs) < state.f + 1:
        return state, []
    best = max(dvcs.values(), key=lambda m: (m.last_normal_view, m.op_number, -m.replica))
    commit = max(m.commit_number for m in dvcs.values())
    state, effects = _adopt_log(state, state.view, best.log, commit)
    logger.info('replica %d is primary of view %d', state.replica, state.view)
    start_view = VrStartView(view=state.view, log=state.log, commit_number=state.commit_number)
    return state, [
        send_to(start_view, *state.others),
        CancelTimer(name='view-change'),
        SetTimer(name='heartbeat', delay_ms=state.heartbeat_ms),
        Mark(label='vr_new_view', data={'view': state.view}),
        *effects,
    ]


def _on_request(state: VrReplicaState, msg: VrRequest) -> Step:
    if state.status != VrStatus.NORMAL:
        return _drop(state, 'not-normal')
    if not state.is_primary:
        return _drop(state, 'not-primary')
    latest = state.client_table.get(msg.client)
    if latest is not None and msg.request_id < latest[0]:
        return _drop(state, 'stale-request')
    if latest is not None and msg.request_id == latest[0]:
        if latest[1] is None:
            return _drop(state, 'in-progress')
        reply = VrReply(
            view=state.view, request_id=msg.request_id, result=latest[1], replica=state.replica
        )
        return state, [send_to(reply, msg.client)]
    entry = VrEntry(client=msg.client, request_id=msg.request_id, op=msg.op)
    state = state.model_copy(
        update={
            'log': (*state.log, entry),
            'client_table': {**state.client_table, msg.client: (msg.request_id, None)},
        }
    )
    prepare = VrPrepare(
        view=state.view,
        op_number=state.op_number,
        commit_number=state.commit_number,
        entry=entry,
    )
    if state.f == 0:
        state, effects = _execute(state, state.op_number)
        return state, [send_to(prepare, *state.others), *effects] if state.others else effects
    return state, [send_to(prepare, *state.others)]


def _on_prepare(state: VrReplicaState, msg: VrPrepare) -> Step:
    if msg.view < state.view:
        return _drop(state, 'stale-view')
    if msg.view > state.view or state.status != VrStatus.NORMAL or state.is_primary:
        return _drop(state, 'wrong-view')
    effects: list[Effect] = [_view_change_timer(state)]
    if msg.op_number <= state.op_number:
        return _drop(state, 'duplicate')[0], effects
    pending = {**state.pending, msg.op_number: msg}
    log = list(state.log)
    table = dict(state.client_table)
    while len(log) + 1 in pending:
        entry = pending.pop(len(log) + 1).entry
        log.append(entry)
        table[entry.client] = (entry.request_id, None)
    extended = len(log) > state.op_number
    state = state.model_copy(update={'log': tuple(log), 'pending': pending, 'client_table': table})
    if extended:
        ok = VrPrepareOk(view=state.view, op_number=state.op_number, replica=state.replica)
        effects.append(send_to(ok, state.primary))
    state, executed = _execute(state, msg.commit_number)
    return state, [*effects, *executed]


def _on_prepare_ok(state: VrReplicaState, msg: VrPrepareOk) -> Step:
    if msg.view != state.view or state.status != VrStatus.NORMAL or not state.is_primary:
        return _drop(state, 'stale-view')
    acked = {**state.acked, msg.replica: max(state.acked.get(msg.replica, 0), msg.op_number)}
    state = state.model_copy(update={'acked': acked})
    target = state.commit_number
    for k in range(state.commit_number + 1, state.op_number + 1):
        if sum(1 for op in acked.values() if op >= k) >= state.f:
            target = k
    return _execute(state, target)


def _on_commit(state: VrReplicaState, msg: VrCommit) -> Step:
    if msg.view != state.view or state.status != VrStatus.NORMAL or state.is_primary:
        return _drop(state, 'stale-view')
    state, effects = _execute(state, msg.commit_number)
    return state, [_view_change_timer(state), *effects]


def _on_start_view_change(state: VrReplicaState, msg: VrStartViewChange) -> Step:
    if msg.view < state.view or (msg.view == state.view and state.status != VrStatus.VIEW_CHANGE):
        return _drop(state, 'stale-view')
    effects: list[Effect] = []
    if msg.view > state.view:
        state, effects = _begin_view_change(state, msg.view)
    state = state.model_copy(
        update={'start_view_changes': state.start_view_changes | {msg.replica}}
    )
    state, more = _maybe_do_view_change(state)
    return state, [*effects, *more]


def _on_do_view_change(state: VrReplicaState, msg: VrDoViewChange) -> Step:
    if msg.view % state.n != state.replica:
        return _drop(state, 'not-primary')
    if msg.view < state.view or (msg.view == state.view and state.status == VrStatus.NORMAL):
        return _drop(state, 'stale-view')
    effects: list[Effect] = []
    if msg.view > state.view:
        state, effects = _begin_view_change(state, msg.view)
    state = state.model_copy(
        update={'do_view_changes': {**state.do_view_changes, msg.replica: msg}}
    )
    state, more = _maybe_start_view(state)
    return state, [*effects, *more]


def _on_start_view(state: VrReplicaState, msg: VrStartView) -> Step:
    if msg.view < state.view or msg.view % state.n == state.replica:
        return _drop(state, 'stale-view')
    if state.status == VrStatus.RECOVERING:
        return _drop(state, 'recovering')
    state, effects = _adopt_log(state, msg.view, msg.log, msg.commit_number)
    effects = [CancelTimer(name='heartbeat'), _view_change_timer(state), *effects]
    if state.op_number > state.commit_number:
        ok = VrPrepareOk(view=state.view, op_number=state.op_number, replica=state.replica)
        effects.append(send_to(ok, state.primary))
    return state, effects


def _on_recovery(state: VrReplicaState, msg: VrRecovery) -> Step:
    if state.status != VrStatus.NORMAL:
        return _drop(state, 'not-normal')
    response = VrRecoveryResponse(
        view=state.view,
        nonce=msg.nonce,
        log=state.log if state.is_primary else (),
        commit_number=state.commit_number,
        replica=state.replica,
        primary=state.is_primary,
    )
    return state, [send_to(response, msg.replica)]


def _on_recovery_response(state: VrReplicaState, msg: VrRecoveryResponse) -> Step:
    if state.status != VrStatus.RECOVERING or msg.nonce != state.recovery_nonce:
        return _drop(state, 'stale-recovery')
    responses = {**state.recovery_responses, msg.replica: msg}
    state = state.model_copy(update={'recovery_responses': responses})
    if len(responses) < state.f + 1:
        return state, []
    view = max(r.view for r in responses.values())
    primary = next((r for r in responses.values() if r.primary and r.view == view), None)
    if primary is None:
        return state, []
    state, effects = _adopt_log(state, view, primary.log, primary.commit_number)
    state = state.model_copy(update={'recovery_responses': {}})
    logger.info('replica %d recovered into view %d', state.replica, view)
    effects = [
        CancelTimer(name='recovery'),
        _view_change_timer(state),
        Mark(label='vr_recovered', data={'view': view}),
        *effects,
    ]
    if state.op_number > state.commit_number:
        ok = VrPrepareOk(view=state.view, op_number=state.op_number, replica=state.replica)
        effects.append(send_to(ok, state.primary))
    return state, effects


def _on_start(state: VrReplicaState, event: Start) -> Step:
    if not event.recovering:
        if state.is_primary:
            return state, [SetTimer(name='heartbeat', delay_ms=state.heartbeat_ms)]
        return state, [_view_change_timer(state)]
    nonce = int(event.at) * 1000 + state.replica + 1
    state = VrReplicaState(
        replica=state.replica,
        n=state.n,
        f=state.f,
        timeout_ms=state.timeout_ms,
        heartbeat_ms=state.heartbeat_ms,
        status=VrStatus.RECOVERING,
        recovery_nonce=nonce,
        dropped=state.dropped,
    )
    recovery = VrRecovery(replica=state.replica, nonce=nonce)
    return state, [
        send_to(recovery, *state.others),
        SetTimer(name='recovery', delay_ms=state.timeout_ms),
    ]


def vr_step(state: VrReplicaState, event: Event) -> Step:
    """Transition function of one VR replica."""
    match event:
        case Start():
            return _on_start(state, event)
        case Fire(name='heartbeat'):
            if state.status != VrStatus.NORMAL or not state.is_primary:
                return state, []
            beat = VrCommit(view=state.view, commit_number=state.commit_number)
            return state, [
                send_to(beat, *state.others),
                SetTimer(name='heartbeat', delay_ms=state.heartbeat_ms),
            ]
        case Fire(name='view-change'):
            if state.status == VrStatus.RECOVERING or (
                state.status == VrStatus.NORMAL and state.is_primary
            ):
                return state, []
            return _begin_view_change(state, state.view + 1)
        case Fire(name='recovery'):
            if state.status != VrStatus.RECOVERING:
                return state, []
            recovery = VrRecovery(replica=state.replica, nonce=state.recovery_nonce)
            return state, [
                send_to(recovery, *state.others),
                SetTimer(name='recovery', delay_ms=state.timeout_ms),
            ]
        case Deliver(envelope=envelope):
            msg = envelope.payload
            if state.status == VrStatus.RECOVERING and not isinstance(msg, VrRecoveryResponse):
                return _drop(state, 'recovering')
            match msg:
                case VrRequest():
                    return _on_request(state, msg)
                case VrPrepare():
                    return _on_prepare(state, msg)
                case VrPrepareOk():
                    return _on_prepare_ok(state, msg)
                case VrCommit():
                    return _on_commit(state, msg)
                case VrStartViewChange():
                    return _on_start_view_change(state, msg)
                case VrDoViewChange():
                    return _on_do_view_change(state, msg)
                case VrStartView():
                    return _on_start_view(state, msg)
                case VrRecovery():
                    return _on_recovery(state, msg)
                case VrRecoveryResponse():
                    return _on_recovery_response(state, msg)
            return _drop(state, 'unexpected')
    return state, []


class VrClientState(BaseModel):
    model_config = ConfigDict(frozen=True)

    node_id: int
    n: int
    ops: tuple[str, ...]
    retry_ms: float
    index: int = 0
    view: int = 0
    results: tuple[str, ...] = ()

    @property
    def request_id(self) -> int:
        return self.index + 1


def _client_request(state: VrClientState, *, everyone: bool = False) -> list[Effect]:
    request = VrRequest(
        client=state.node_id, request_id=state.request_id, op=state.ops[state.index]
    )
    targets = range(state.n) if everyone else (state.view % state.n,)
    return [
        send_to(request, *targets),
        SetTimer(name='retry', delay_ms=state.retry_ms),
        Mark(label='request_sent', data={'request_id': state.request_id}),
    ]


def vr_client_step(state: VrClientState, event: Event) -> tuple[VrClientState, list[Effect]]:
    """Closed-loop client: one outstanding request, retried to every replica."""
    match event:
        case Start() if state.ops:
            return state, _client_request(state)
        case Fire(name='retry') if state.index < len(state.ops):
            return state, _client_request(state, everyone=True)
        case Deliver(envelope=envelope):
            reply = envelope.payload
            if (
                not isinstance(reply, VrReply)
                or state.index >= len(state.ops)
                or reply.request_id != state.request_id
            ):
                return state, []
            state = state.model_copy(
                update={
                    'index': state.index + 1,
                    'view': reply.view,
                    'results': (*state.results, reply.result),
                }
            )
            effects: list[Effect] = [
                Mark(label='reply_received', data={'request_id': reply.request_id})
            ]
            if state.index < len(state.ops):
                return state, [*effects, *_client_request(state)]
            return state, [*effects, CancelTimer(name='retry')]
    return state, []


def vr_snapshot(state: VrReplicaState) -> dict[str, Any]:
    return {
        'view': state.view,
        'status': state.status.value,
        'op_number': state.op_number,
        'commit_number': state.commit_number,
        'executed': list(state.executed),
        'dropped': dict(sorted(state.dropped.items())),
    }


def prefix_consistent(logs: Iterable[Sequence[str]]) -> bool:
    """True when every pair of logs agrees on their common prefix."""
    ordered = sorted((tuple(log) for log in logs), key=len)
    return all(
        shorter == longer[: len(shorter)]
        for i, shorter in enumerate(ordered)
        for longer in ordered[i + 1 :]
    )


class VrOutcome(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int
    f: int
    executed: dict[int, tuple[str, ...]]
    views: dict[int, int]
    results: tuple[str, ...]
    trace: Trace

    @property
    def normal_messages(self) -> int:
        """Messages of the normal protocol, heartbeats excluded."""
        kinds = ('VrRequest', 'VrPrepare', 'VrPrepareOk', 'VrReply')
        return sum(self.trace.sent[kind] for kind in kinds)


def vr_run(
    n: int,
    f: int,
    ops: Sequence[str],
    adversary: AdversarySpec | None = None,
    model: SynchronyModel | None = None,
    seed: int = 0,
    *,
    until_ms: float = 20_000.0,
    timeout_ms: float | None = None,
) -> VrOutcome:
    """
    Run n replicas and one closed-loop client issuing `ops`.

    Args:
        n: Replica count.
        f: Crash faults tolerated; PrepareOKs needed per commit.
        ops: Operations the client submits in order.
        adversary: Crashes (with optional recovery) and other behaviours.
        model: Network model.
        seed: Run seed.
        until_ms: Simulated time at which the run stops.
        timeout_ms: View-change timeout; 4x the mean network delay by default.

    Returns:
        Executed logs and views of non-corrupted replicas and the trace.
    """
    adversary = adversary or AdversarySpec()
    model = model or SynchronyModel()
    timeout = timeout_ms or 4 * model.mean_delay_ms
    replicas = [
        StateMachineNode(
            r,
            VrReplicaState(
                replica=r, n=n, f=f, timeout_ms=timeout, heartbeat_ms=timeout / 4
            ),
            vr_step,
            vr_snapshot,
        )
        for r in range(n)
    ]
    client = StateMachineNode(
        n,
        VrClientState(node_id=n, n=n, ops=tuple(ops), retry_ms=4 * timeout),
        vr_client_step,
        lambda s: {'results': list(s.results)},
    )
    trace = run([*replicas, client], adversary, model, seed, until_ms=until_ms)
    healthy = [node for node in replicas if node.node_id not in adversary.corrupted]
    recovered = [
        node
        for node in replicas
        if (crash := adversary.crash_of(node.node_id)) is not None
        and crash.recover_at_ms is not None
        and node.state.status == VrStatus.NORMAL
    ]
    return VrOutcome(
        n=n,
        f=f,
        executed={node.node_id: node.state.executed for node in [*healthy, *recovered]},
        views={node.node_id: node.state.view for node in replicas},
        results=client.state.results,
        trace=trace,
    )
