"""
Practical Byzantine Fault Tolerance with signed messages.

Normal case: the primary of view v (replica v mod n) assigns a sequence number
and multicasts a PrePrepare; backups multicast Prepare. A replica holding the
PrePrepare and 2f matching Prepares from distinct backups is prepared and
multicasts Commit; 2f+1 matching Commits (its own included) commit the
request, which executes once every lower sequence number has executed.

A backup that knows of an unexecuted request arms a view-change timer; on
expiry it multicasts ViewChange for v+1 carrying its prepared certificates.
Every replica acknowledges the ViewChanges it receives to the new primary,
which sends NewView once it holds 2f+1 ViewChanges and 2f acknowledgements,
re-proposing prepared requests and filling gaps with null requests.
"""

import logging
from collections.abc import Iterable, Sequence
from enum import StrEnum
from typing import Any

from pydantic import BaseModel, ConfigDict, Field

from src.core.crypto import ZERO_DIGEST, KeyPair, hash_concat, keygen
from src.core.netsim import (
    AdversarySpec,
    CancelTimer,
    Deliver,
    Effect,
    Event,
    Fire,
    Mark,
    SetTimer,
    SignedMessage,
    Start,
    StateMachineNode,
    SynchronyModel,
    Trace,
    run,
    send_to,
)

logger = logging.getLogger(__name__)

DEFAULT_CHECKPOINT_INTERVAL = 100
NULL_OP = 'null'


class PbftStatus(StrEnum):
    NORMAL = 'normal'
    VIEW_CHANGE = 'view-change'


class PbftRequest(SignedMessage):
    TAG = 0x20

    client: int
    timestamp: int
    op: str


class PbftPrePrepare(SignedMessage):
    TAG = 0x21
    EQUIVOCABLE = 'request_hash'

    view: int
    seq: int
    request_hash: bytes
    request: PbftRequest | None
    replica: int


class PbftPrepare(SignedMessage):
    TAG = 0x22
    EQUIVOCABLE = 'request_hash'

    view: int
    seq: int
    request_hash: bytes
    replica: int


class PbftCommit(SignedMessage):
    TAG = 0x23
    EQUIVOCABLE = 'request_hash'

    view: int
    seq: int
    request_hash: bytes
    replica: int


class PbftReply(SignedMessage):
    TAG = 0x24
    EQUIVOCABLE = 'result'

    view: int
    timestamp: int
    client: int
    replica: int
    result: str


class PbftCheckpoint(SignedMessage):
    TAG = 0x25
    EQUIVOCABLE = 'state_digest'

    seq: int
    state_digest: bytes
    replica: int


class PbftPrepared(BaseModel):
    """A prepared certificate summarised in a ViewChange."""

    model_config = ConfigDict(frozen=True)

    view: int
    seq: int
    request_hash: bytes
    request: PbftRequest | None


class PbftViewChange(SignedMessage):
    TAG = 0x26

    view: int
    stable_seq: int
    prepared: tuple[PbftPrepared, ...]
    replica: int


class PbftViewChangeAck(SignedMessage):
    TAG = 0x27

    view: int
    replica: int
    origin: int
    vc_digest: bytes


class PbftNewView(SignedMessage):
    TAG = 0x28

    view: int
    view_changes: tuple[int, ...]
    pre_prepares: tuple[PbftPrePrepare, ...]
    replica: int


class PbftConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    replica: int
    n: int
    f: int
    keys: KeyPair
    publics: tuple[bytes, ...]
    timeout_ms: float
    checkpoint_interval: int = DEFAULT_CHECKPOINT_INTERVAL

    @property
    def others(self) -> tuple[int, ...]:
        return tuple(r for r in range(self.n) if r != self.replica)


class PbftSlot(BaseModel):
    model_config = ConfigDict(frozen=True)

    view: int
    seq: int
    digest: bytes
    request: PbftRequest | None
    prepared: bool = False
    committed: bool = False


Votes = dict[tuple[int, int], dict[int, bytes]]


class PbftReplicaState(BaseModel):
    model_config = ConfigDict(frozen=True)

    config: PbftConfig
    view: int = 0
    status: PbftStatus = PbftStatus.NORMAL
    next_seq: int = 0
    slots: dict[int, PbftSlot] = Field(default_factory=dict)
    prepare_votes: Votes = Field(default_factory=dict)
    commit_votes: Votes = Field(default_factory=dict)
    last_executed: int = 0
    executed: tuple[str, ...] = ()
    state_digest: bytes = ZERO_DIGEST
    replies: dict[int, tuple[int, str]] = Field(default_factory=dict)
    known_requests: dict[bytes, PbftRequest] = Field(default_factory=dict)
    checkpoint_votes: dict[int, dict[int, bytes]] = Field(default_factory=dict)
    stable_checkpoint: int = 0
    view_changes: dict[int, dict[int, PbftViewChange]] = Field(default_factory=dict)
    view_change_acks: dict[int, frozenset[int]] = Field(default_factory=dict)
    timer_armed: bool = False
    dropped: dict[str, int] = Field(default_factory=dict)

    @property
    def replica(self) -> int:
        return self.config.replica

    @property
    def f(self) -> int:
        return self.config.f

    def primary_of(self, view: int) -> int:
        return view % self.config.n

    @property
    def is_primary(self) -> bool:
        return self.primary_of(self.view) == self.replica


Step = tuple[PbftReplicaState, list[Effect]]


def request_digest(request: PbftRequest | None) -> bytes:
    return ZERO_DIGEST if request is None else request.digest()


def _drop(state: PbftReplicaState, reason: str) -> Step:
    dropped = {**state.dropped, reason: state.dropped.get(reason, 0) + 1}
    return state.model_copy(update={'dropped': dropped}), []


def _authentic(state: PbftReplicaState, msg: SignedMessage, replica: int) -> bool:
    publics = state.config.publics
    return (
        0 <= replica < len(publics)
        and msg.signer == publics[replica]
        and msg.verify_signature(state.config.keys.scheme)
    )


def _sign[M: SignedMessage](state: PbftReplicaState, msg: M) -> M:
    return msg.signed(state.config.keys)


def _vote(votes: Votes, view: int, seq: int, replica: int, digest: bytes) -> Votes:
    current = votes.get((view, seq), {})
    if replica in current:
        return votes
    return {**votes, (view, seq): {**current, replica: digest}}


def _matching(votes: Votes, view: int, seq: int, digest: bytes, exclude: int | None = None) -> int:
    return sum(
        1
        for replica, d in votes.get((view, seq), {}).items()
        if d == digest and replica != exclude
    )


def _pending_requests(state: PbftReplicaState) -> bool:
    return bool(state.known_requests) or any(
        slot.seq > state.last_executed for slot in state.slots.values()
    )


def _timer_effects(state: PbftReplicaState) -> Step:
    """Arm the view-change timer while work is outstanding, cancel it otherwise."""
    if state.is_primary and state.status == PbftStatus.NORMAL:
        return state, []
    outstanding = _pending_requests(state)
    if outstanding and not state.timer_armed:
        return state.model_copy(update={'timer_armed': True}), [
            SetTimer(name='view-change', delay_ms=state.config.timeout_ms)
        ]
    if not outstanding and state.timer_armed:
        return state.model_copy(update={'timer_armed': False}), [CancelTimer(name='view-change')]
    return state, []


def _checkpoint(state: PbftReplicaState, seq: int, replica: int, digest: bytes) -> Step:
    votes = state.checkpoint_votes.get(seq, {})
    if replica in votes:
        return state, []
    votes = {**votes, replica: digest}
    state = state.model_copy(update={'checkpoint_votes': {**state.checkpoint_votes, seq: votes}})
    own = votes.get(state.replica)
    if (
        own is None
        or seq <= state.stable_checkpoint
        or sum(1 for d in votes.values() if d == own) < 2 * state.f + 1
    ):
        return state, []
    logger.debug('replica %d: checkpoint %d stable', state.replica, seq)
    return state.model_copy(
        update={
            'stable_checkpoint': seq,
            'slots': {s: slot for s, slot in state.slots.items() if s > seq},
            'prepare_votes': {k: v for k, v in state.prepare_votes.items() if k[1] > seq},
            'commit_votes': {k: v for k, v in state.commit_votes.items() if k[1] > seq},
            'checkpoint_votes': {s: v for s, v in state.checkpoint_votes.items() if s >= seq},
        }
    ), [Mark(label='pbft_stable_checkpoint', data={'seq': seq})]


def _execute_ready(state: PbftReplicaState) -> Step:
    effects: list[Effect] = []
    while (slot := state.slots.get(state.last_executed + 1)) is not None and slot.committed:
        request = slot.request
        op = NULL_OP if request is None else request.op
        result = f'{op}@{slot.seq}'
        replies = dict(state.replies)
        known = dict(state.known_requests)
        known.pop(slot.digest, None)
        if request is not None:
            replies[request.client] = (request.timestamp, result)
            reply = PbftReply(
                view=state.view,
                timestamp=request.timestamp,
                client=request.client,
                replica=state.replica,
                result=result,
            )
            effects.append(send_to(_sign(state, reply), request.client))
        state = state.model_copy(
            update={
                'last_executed': slot.seq,
                'executed': (*state.executed, op),
                'state_digest': hash_concat(state.state_digest, slot.digest),
                'replies': replies,
                'known_requests': known,
            }
        )
        effects.append(Mark(label='pbft_executed', data={'seq': slot.seq}))
        if slot.seq % state.config.checkpoint_interval == 0:
            checkpoint = PbftCheckpoint(
                seq=slot.seq, state_digest=state.state_digest, replica=state.replica
            )
            effects.append(send_to(_sign(state, checkpoint), *state.config.others))
            state, more = _checkpoint(state, slot.seq, state.replica, state.state_digest)
            effects.extend(more)
    state, timers = _timer_effects(state)
    return state, [*effects, *timers]


def _progress(state: PbftReplicaState, seq: int) -> Step:
    """Advance one slot through prepared and committed, then execute."""
    slot = state.slots.get(seq)
    if slot is None or slot.view != state.view:
        return state, []
    effects: list[Effect] = []
    primary = state.primary_of(slot.view)
    if not slot.prepared and (
        _matching(state.prepare_votes, slot.view, seq, slot.digest, exclude=primary)
        >= 2 * state.f
    ):
        slot = slot.model_copy(update={'prepared': True})
        commit = PbftCommit(view=slot.view, seq=seq, request_hash=slot.digest, replica=state.replica)
        state = state.model_copy(
            update={
                'slots': {**state.slots, seq: slot},
                'commit_votes': _vote(
                    state.commit_votes, slot.view, seq, state.replica, slot.digest
                ),
            }
        )
        effects.append(send_to(_sign(state, commit), *state.config.others))
    if (
        slot.prepared
        and not slot.committed
        and _matching(state.commit_votes, slot.view, seq, slot.digest) >= 2 * state.f + 1
    ):
        slot = slot.model_copy(update={'committed': True})
        state = state.model_copy(update={'slots': {**state.slots, seq: slot}})
    if slot.committed:
        state, more = _execute_ready(state)
        effects.extend(more)
    return state, effects


def _assign(state: PbftReplicaState, request: PbftRequest) -> Step:
    """Primary: give the request the next sequence number."""
    seq = state.next_seq + 1
    digest = request.digest()
    pre_prepare = _sign(
        state,
        PbftPrePrepare(
            view=state.view, seq=seq, request_hash=digest, request=request, replica=state.replica
        ),
    )
    slot = PbftSlot(view=state.view, seq=seq, digest=digest, request=request)
    state = state.model_copy(update={'next_seq': seq, 'slots': {**state.slots, seq: slot}})
    state, effects = _progress(state, seq)
    return state, [send_to(pre_prepare, *state.config.others), *effects]


def _assigned(state: PbftReplicaState, digest: bytes) -> bool:
    return any(
        slot.digest == digest and slot.view == state.view for slot in state.slots.values()
    )


def _on_request(state: PbftReplicaState, msg: PbftRequest) -> Step:
    if not msg.verify_signature(state.config.keys.scheme):
        return _drop(state, 'bad-signature')
    last = state.replies.get(msg.client)
    if last is not None and msg.timestamp <= last[0]:
        if msg.timestamp < last[0]:
            return _drop(state, 'stale-request')
        reply = PbftReply(
            view=state.view,
            timestamp=msg.timestamp,
            client=msg.client,
            replica=state.replica,
            result=last[1],
        )
        return state, [send_to(_sign(state, reply), msg.client)]
    digest = msg.digest()
    newly_known = digest not in state.known_requests
    state = state.model_copy(update={'known_requests': {**state.known_requests, digest: msg}})
    if state.status != PbftStatus.NORMAL:
        return state, []
    if state.is_primary:
        if _assigned(state, digest):
            return state, []
        return _assign(state, msg)
    effects: list[Effect] = []
    if newly_known:
        effects.append(send_to(msg, state.primary_of(state.view)))
    state, timers = _timer_effects(state)
    return state, [*effects, *timers]


def _on_pre_prepare(state: PbftReplicaState, msg: PbftPrePrepare) -> Step:
    if not _authentic(state, msg, msg.replica) or msg.replica != state.primary_of(msg.view):
        return _drop(state, 'bad-signature')
    if msg.view != state.view or state.status != PbftStatus.NORMAL or state.is_primary:
        return _drop(state, 'stale-view')
    if msg.seq <= state.stable_checkpoint:
        return _drop(state, 'out-of-window')
    if msg.request is not None and not msg.request.verify_signature(state.config.keys.scheme):
        return _drop(state, 'bad-signature')
    if msg.request_hash != request_digest(msg.request):
        return _drop(state, 'bad-digest')
    existing = state.slots.get(msg.seq)
    if existing is not None and existing.view == msg.view:
        return _drop(state, 'duplicate' if existing.digest == msg.request_hash else 'conflicting')
    slot = PbftSlot(view=msg.view, seq=msg.seq, digest=msg.request_hash, request=msg.request)
    known = dict(state.known_requests)
    if msg.request is not None and msg.seq > state.last_executed:
        known[msg.request_hash] = msg.request
    state = state.model_copy(
        update={
            'slots': {**state.slots, msg.seq: slot},
            'prepare_votes': _vote(
                state.prepare_votes, msg.view, msg.seq, state.replica, msg.request_hash
            ),
            'known_requests': known,
            'next_seq': max(state.next_seq, msg.seq),
        }
    )
    prepare = PbftPrepare(view=msg.view, seq=msg.seq, request_hash=msg.request_hash, replica=state.replica)
    effects: list[Effect] = [send_to(_sign(state, prepare), *state.config.others)]
    state, timers = _timer_effects(state)
    state, more = _progress(state, msg.seq)
    return state, [*effects, *timers, *more]


def _on_phase_vote(state: PbftReplicaState, msg: PbftPrepare | PbftCommit) -> Step:
    if not _authentic(state, msg, msg.replica):
        return _drop(state, 'bad-signature')
    if msg.view < state.view or msg.seq <= state.stable_checkpoint:
        return _drop(state, 'stale-view')
    if isinstance(msg, PbftPrepare):
        if msg.replica == state.primary_of(msg.view):
            return _drop(state, 'primary-prepare')
        votes = _vote(state.prepare_votes, msg.view, msg.seq, msg.replica, msg.request_hash)
        state = state.model_copy(update={'prepare_votes': votes})
    else:
        votes = _vote(state.commit_votes, msg.view, msg.seq, msg.replica, msg.request_hash)
        state = state.model_copy(update={'commit_votes': votes})
    if state.status != PbftStatus.NORMAL:
        return state, []
    return _progress(state, msg.seq)


def _on_checkpoint(state: PbftReplicaState, msg: PbftCheckpoint) -> Step:
    if not _authentic(state, msg, msg.replica):
        return _drop(state, 'bad-signature')
    if msg.seq <= state.stable_checkpoint:
        return _drop(state, 'stale-checkpoint')
    return _checkpoint(state, msg.seq, msg.replica, msg.state_digest)


def _begin_view_change(state: PbftReplicaState, view: int) -> Step:
    prepared = tuple(
        PbftPrepared(view=slot.view, seq=slot.seq, request_hash=slot.digest, request=slot.request)
        for seq, slot in sorted(state.slots.items())
        if slot.prepared and seq > state.stable_checkpoint
    )
    view_change = _sign(
        state,
        PbftViewChange(
            view=view,
            stable_seq=state.stable_checkpoint,
            prepared=prepared,
            replica=state.replica,
        ),
    )
    logger.info('replica %d moves to view change %d', state.replica, view)
    collected = {**state.view_changes.get(view, {}), state.replica: view_change}
    state = state.model_copy(
        update={
            'view': view,
            'status': PbftStatus.VIEW_CHANGE,
            'view_changes': {**state.view_changes, view: collected},
            'timer_armed': True,
        }
    )
    effects: list[Effect] = [
        send_to(view_change, *state.config.others),
        SetTimer(name='view-change', delay_ms=2 * state.config.timeout_ms),
        Mark(label='pbft_view_change', data={'view': view}),
    ]
    state, more = _maybe_new_view(state, view)
    return state, [*effects, *more]


def _on_view_change(state: PbftReplicaState, msg: PbftViewChange) -> Step:
    if not _authentic(state, msg, msg.replica):
        return _drop(state, 'bad-signature')
    if msg.view < state.view or (msg.view == state.view and state.status == PbftStatus.NORMAL):
        return _drop(state, 'stale-view')
    collected = {**state.view_changes.get(msg.view, {}), msg.replica: msg}
    state = state.model_copy(update={'view_changes': {**state.view_changes, msg.view: collected}})
    effects: list[Effect] = []
    new_primary = state.primary_of(msg.view)
    if new_primary != state.replica:
        ack = PbftViewChangeAck(
            view=msg.view, replica=state.replica, origin=msg.replica, vc_digest=msg.digest()
        )
        effects.append(send_to(_sign(state, ack), new_primary))
    if msg.view > state.view and len(collected) >= state.f + 1:
        state, more = _begin_view_change(state, msg.view)
        return state, [*effects, *more]
    state, more = _maybe_new_view(state, msg.view)
    return state, [*effects, *more]


def _on_view_change_ack(state: PbftReplicaState, msg: PbftViewChangeAck) -> Step:
    if not _authentic(state, msg, msg.replica):
        return _drop(state, 'bad-signature')
    if state.primary_of(msg.view) != state.replica or msg.view < state.view:
        return _drop(state, 'stale-view')
    acks = state.view_change_acks.get(msg.view, frozenset()) | {msg.replica}
    state = state.model_copy(
        update={'view_change_acks': {**state.view_change_acks, msg.view: acks}}
    )
    return _maybe_new_view(state, msg.view)


def _reproposals(state: PbftReplicaState, view: int, changes: Iterable[PbftViewChange]) -> list[PbftPrePrepare]:
    changes = list(changes)
    low = max(vc.stable_seq for vc in changes)
    best: dict[int, PbftPrepared] = {}
    for vc in changes:
        for cert in vc.prepared:
            if cert.seq > low and (cert.seq not in best or cert.view > best[cert.seq].view):
                best[cert.seq] = cert
    high = max(best, default=low)
    pre_prepares = []
    for seq in range(low + 1, high + 1):
        cert = best.get(seq)
        request = cert.request if cert is not None else None
        pre_prepares.append(
            _sign(
                state,
                PbftPrePrepare(
                    view=view,
                    seq=seq,
                    request_hash=request_digest(request),
                    request=request,
                    replica=state.replica,
                ),
            )
        )
    return pre_prepares


def _maybe_new_view(state: PbftReplicaState, view: int) -> Step:
    if (
        state.primary_of(view) != state.replica
        or state.view != view
        or state.status != PbftStatus.VIEW_CHANGE
    ):
        return state, []
    changes = state.view_changes.get(view, {})
    acks = state.view_change_acks.get(view, frozenset())
    if state.replica not in changes or len(changes) < 2 * state.f + 1 or len(acks) < 2 * state.f:
        return state, []
    pre_prepares = _reproposals(state, view, changes.values())
    proposed = {pp.request_hash for pp in pre_prepares}
    seq = max([state.last_executed, *(pp.seq for pp in pre_prepares)])
    for digest, request in sorted(state.known_requests.items()):
        if digest in proposed:
            continue
        seq += 1
        pre_prepares.append(
            _sign(
                state,
                PbftPrePrepare(
                    view=view, seq=seq, request_hash=digest, request=request, replica=state.replica
                ),
            )
        )
    new_view = _sign(
        state,
        PbftNewView(
            view=view,
            view_changes=tuple(sorted(changes)),
            pre_prepares=tuple(pre_prepares),
            replica=state.replica,
        ),
    )
    logger.info('replica %d is primary of view %d', state.replica, view)
    slots = {
        pp.seq: PbftSlot(view=view, seq=pp.seq, digest=pp.request_hash, request=pp.request)
        for pp in pre_prepares
        if pp.seq > state.last_executed
    }
    state = state.model_copy(
        update={
            'status': PbftStatus.NORMAL,
            'slots': {**{s: v for s, v in state.slots.items() if s <= state.last_executed}, **slots},
            'next_seq': seq,
            'timer_armed': False,
        }
    )
    effects: list[Effect] = [
        send_to(new_view, *state.config.others),
        CancelTimer(name='view-change'),
        Mark(label='pbft_new_view', data={'view': view}),
    ]
    for slot_seq in sorted(slots):
        state, more = _progress(state, slot_seq)
        effects.extend(more)
    return state, effects


def _on_new_view(state: PbftReplicaState, msg: PbftNewView) -> Step:
    if not _authentic(state, msg, msg.replica) or msg.replica != state.primary_of(msg.view):
        return _drop(state, 'bad-signature')
    if msg.view < state.view or (msg.view == state.view and state.status == PbftStatus.NORMAL):
        return _drop(state, 'stale-view')
    state = state.model_copy(
        update={
            'view': msg.view,
            'status': PbftStatus.NORMAL,
            'slots': {s: v for s, v in state.slots.items() if s <= state.last_executed},
            'timer_armed': False,
        }
    )
    effects: list[Effect] = [
        CancelTimer(name='view-change'),
        Mark(label='pbft_new_view', data={'view': msg.view}),
    ]
    for pre_prepare in msg.pre_prepares:
        if pre_prepare.seq <= state.last_executed:
            continue
        state, more = _on_pre_prepare(state, pre_prepare)
        effects.extend(more)
    state, timers = _timer_effects(state)
    return state, [*effects, *timers]


def pbft_step(state: PbftReplicaState, event: Event) -> Step:
    """Transition function of one PBFT replica."""
    match event:
        case Fire(name='view-change'):
            if state.status == PbftStatus.NORMAL and not _pending_requests(state):
                return state.model_copy(update={'timer_armed': False}), []
            return _begin_view_change(state, state.view + 1)
        case Deliver(envelope=envelope):
            msg = envelope.payload
            match msg:
                case PbftRequest():
                    return _on_request(state, msg)
                case PbftPrePrepare():
                    return _on_pre_prepare(state, msg)
                case PbftPrepare() | PbftCommit():
                    return _on_phase_vote(state, msg)
                case PbftCheckpoint():
                    return _on_checkpoint(state, msg)
                case PbftViewChange():
                    return _on_view_change(state, msg)
                case PbftViewChangeAck():
                    return _on_view_change_ack(state, msg)
                case PbftNewView():
                    return _on_new_view(state, msg)
            return _drop(state, 'unexpected')
    return state, []


class ClientDecision(BaseModel):
    model_config = ConfigDict(frozen=True)

    accepted: bool
    result: str | None = None
    matching: int = 0
    conflicts: int = 0


def pbft_client_accept(
    replies: Iterable[PbftReply], f: int, *, quorum: int | None = None
) -> ClientDecision:
    """
    Decide whether a client may accept a result.

    Replies count once per replica. A result is accepted when `quorum`
    replicas (2f+1 unless overridden, e.g. f+1) report it; replies carrying
    any other result are counted as conflicts.
    """
    needed = 2 * f + 1 if quorum is None else quorum
    by_replica: dict[int, PbftReply] = {}
    for reply in replies:
        by_replica.setdefault(reply.replica, reply)
    if not by_replica:
        return ClientDecision(accepted=False)
    groups: dict[tuple[int, str], int] = {}
    for reply in by_replica.values():
        key = (reply.timestamp, reply.result)
        groups[key] = groups.get(key, 0) + 1
    (timestamp, result), matching = min(groups.items(), key=lambda item: (-item[1], item[0]))
    conflicts = len(by_replica) - matching
    if matching >= needed:
        return ClientDecision(accepted=True, result=result, matching=matching, conflicts=conflicts)
    return ClientDecision(accepted=False, matching=matching, conflicts=conflicts)


class PbftClientState(BaseModel):
    model_config = ConfigDict(frozen=True)

    node_id: int
    n: int
    f: int
    keys: KeyPair
    publics: tuple[bytes, ...]
    ops: tuple[str, ...]
    retry_ms: float
    reply_quorum: int | None = None
    index: int = 0
    view: int = 0
    replies: dict[int, PbftReply] = Field(default_factory=dict)
    results: tuple[str, ...] = ()
    conflicts: int = 0
    rejected: int = 0

    @property
    def timestamp(self) -> int:
        return self.index + 1


def _client_request(state: PbftClientState, *, everyone: bool = False) -> list[Effect]:
    request = PbftRequest(
        client=state.node_id, timestamp=state.timestamp, op=state.ops[state.index]
    ).signed(state.keys)
    targets = range(state.n) if everyone else (state.view % state.n,)
    return [
        send_to(request, *targets),
        SetTimer(name='retry', delay_ms=state.retry_ms),
        Mark(label='request_sent', data={'request_id': state.timestamp}),
    ]


def pbft_client_step(state: PbftClientState, event: Event) -> tuple[PbftClientState, list[Effect]]:
    """Client: waits for a reply quorum, broadcasting its request on timeout."""
    match event:
        case Start() if state.ops:
            return state, _client_request(state)
        case Fire(name='retry') if state.index < len(state.ops):
            return state, _client_request(state, everyone=True)
        case Deliver(envelope=envelope):
            reply = envelope.payload
            if not isinstance(reply, PbftReply) or state.index >= len(state.ops):
                return state, []
            if (
                reply.replica >= len(state.publics)
                or reply.signer != state.publics[reply.replica]
                or not reply.verify_signature(state.keys.scheme)
            ):
                return state.model_copy(update={'rejected': state.rejected + 1}), []
            if reply.timestamp != state.timestamp:
                return state, []
            replies = {**state.replies, reply.replica: reply}
            decision = pbft_client_accept(replies.values(), state.f, quorum=state.reply_quorum)
            if not decision.accepted:
                return state.model_copy(update={'replies': replies}), []
            state = state.model_copy(
                update={
                    'index': state.index + 1,
                    'view': max(state.view, reply.view),
                    'replies': {},
                    'results': (*state.results, decision.result),
                    'conflicts': state.conflicts + decision.conflicts,
                }
            )
            effects: list[Effect] = [
                Mark(label='reply_received', data={'request_id': reply.timestamp})
            ]
            if state.index < len(state.ops):
                return state, [*effects, *_client_request(state)]
            return state, [*effects, CancelTimer(name='retry')]
    return state, []


def pbft_snapshot(state: PbftReplicaState) -> dict[str, Any]:
    return {
        'view': state.view,
        'status': state.status.value,
        'last_executed': state.last_executed,
        'stable_checkpoint': state.stable_checkpoint,
        'executed': list(state.executed),
        'dropped': dict(sorted(state.dropped.items())),
    }


PHASES = ('PbftPrePrepare', 'PbftPrepare', 'PbftCommit', 'PbftReply')


class PbftOutcome(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int
    f: int
    executed: dict[int, tuple[str, ...]]
    views: dict[int, int]
    stable_checkpoints: dict[int, int]
    results: tuple[str, ...]
    conflicts: int
    trace: Trace

    @property
    def phase_messages(self) -> dict[str, int]:
        return {phase: self.trace.sent[phase] for phase in PHASES}

    @property
    def honest_agree(self) -> bool:
        return len(set(self.executed.values())) <= 1


def pbft_run(
    n: int,
    f: int,
    ops: Sequence[str],
    adversary: AdversarySpec | None = None,
    model: SynchronyModel | None = None,
    seed: int = 0,
    *,
    until_ms: float = 30_000.0,
    timeout_ms: float | None = None,
    checkpoint_interval: int = DEFAULT_CHECKPOINT_INTERVAL,
    reply_quorum: int | None = None,
    scheme: str | None = None,
) -> PbftOutcome:
    """
    Run n replicas and one client issuing `ops` in order.

    Args:
        n: Replica count (at least 3f+1 for the guarantees).
        f: Byzantine faults tolerated.
        ops: Operations submitted by the client.
        adversary: Corrupted replicas and their behaviour.
        model: Network model.
        seed: Run seed.
        until_ms: Simulated time at which the run stops.
        timeout_ms: View-change timeout; 4x the mean network delay by default.
        checkpoint_interval: Sequence numbers between checkpoints.
        reply_quorum: Replies the client needs; 2f+1 by default.
        scheme: Signature scheme for replicas and client.

    Returns:
        Executed logs of honest replicas, client results and the trace.
    """
    adversary = adversary or AdversarySpec()
    model = model or SynchronyModel()
    timeout = timeout_ms or 4 * model.mean_delay_ms
    keys = [keygen(f'pbft-replica-{r}', scheme) for r in range(n)]
    publics = tuple(k.public for k in keys)
    replicas = []
    for r in range(n):
        config = PbftConfig(
            replica=r,
            n=n,
            f=f,
            keys=keys[r],
            publics=publics,
            timeout_ms=timeout,
            checkpoint_interval=checkpoint_interval,
        )
        replicas.append(
            StateMachineNode(
                r,
                PbftReplicaState(config=config),
                pbft_step,
                pbft_snapshot,
                sign_fn=lambda payload, k=keys[r]: payload.signed(k),
            )
        )
    client_keys = keygen('pbft-client', scheme)
    client = StateMachineNode(
        n,
        PbftClientState(
            node_id=n,
            n=n,
            f=f,
            keys=client_keys,
            publics=publics,
            ops=tuple(ops),
            retry_ms=4 * timeout,
            reply_quorum=reply_quorum,
        ),
        pbft_client_step,
        lambda s: {'results': list(s.results), 'conflicts': s.conflicts},
    )
    trace = run([*replicas, client], adversary, model, seed, until_ms=until_ms)
    honest = [node for node in replicas if node.node_id not in adversary.corrupted]
    return PbftOutcome(
        n=n,
        f=f,
        executed={node.node_id: node.state.executed for node in honest},
        views={node.node_id: node.state.view for node in replicas},
        stable_checkpoints={node.node_id: node.state.stable_checkpoint for node in honest},
        results=client.state.results,
        conflicts=client.state.conflicts,
        trace=trace,
    )
