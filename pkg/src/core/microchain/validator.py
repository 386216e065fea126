"""
The Microchain validator state machine and its workload client.

Slot timeline of one epoch, as seen by every validator:

    PROPOSE  members evaluate Proof-of-Credit once per slot until the head
             reaches the epoch boundary height
    VOTE     members vote for the boundary checkpoint on the next tick and
             everybody waits for a credit-weighted 2/3 majority
    DEAL     incentives are applied, members deal their RandShare secret
    REVEAL   members reveal the shares they hold
    TICKETS  the session is combined into the next seed; everyone publishes
             a sortition ticket
    SELECT   the next dynasty is selected and the next epoch starts

Validators are nodes 0..N-1; the workload client is node N.
"""

import logging
import math
from enum import StrEnum
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.core.crypto import KeyPair, hash_concat, short_hex
from src.core.ledger import (
    Block,
    Checkpoint,
    ForkTree,
    InvalidBlock,
    SafetyViolation,
    Transaction,
    make_transaction,
    verify_transaction,
)
from src.core.ledger.forktree import DEFAULT_EPOCH_LENGTH
from src.core.microchain.dynasty import Dynasty
from src.core.microchain.errors import InsufficientCandidates
from src.core.microchain.incentives import (
    CreditLedger,
    EpochEvents,
    RewardPolicy,
    apply_incentives,
)
from src.core.microchain.messages import (
    BlockAnnounce,
    DealMsg,
    RevealMsg,
    TicketMsg,
    TxAnnounce,
    VoteMsg,
)
from src.core.microchain.poc import DEFAULT_RHO, MAX_SLOT_LAG, poc_try_propose, verify_block_poc
from src.core.microchain.randshare import RandShareSession, deal_secret
from src.core.microchain.sortition import SortitionTicket, make_ticket, select_committee
from src.core.microchain.voting import (
    EquivocationEvidence,
    TallyStatus,
    VoteBook,
    cast_vote,
    sign_vote,
    tally_votes,
    vote_problem,
)
from src.core.netsim import (
    Deliver,
    Effect,
    Event,
    Fire,
    Halt,
    Mark,
    Send,
    SetTimer,
    Start,
    send_to,
)

logger = logging.getLogger(__name__)

# Canonical-size allowance for header, signature and length prefixes.
BLOCK_OVERHEAD_BYTES = 300
FILLER_OVERHEAD_BYTES = 124
# Slack for float drift in timer times when mapping a time to its slot.
SLOT_EPSILON = 1e-6
DEFAULT_TICKET_WAIT_SLOTS = 2


class Phase(StrEnum):
    PROPOSE = 'propose'
    VOTE = 'vote'
    DEAL = 'deal'
    REVEAL = 'reveal'
    TICKETS = 'tickets'
    SELECT = 'select'
    DONE = 'done'


class MicrochainParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    slot_ms: float = Field(default=1000.0, gt=0)
    epoch_length: int = Field(default=DEFAULT_EPOCH_LENGTH, gt=0)
    rho: float = Field(default=DEFAULT_RHO, gt=0)
    committee_size: int | None = Field(default=None, gt=0)
    epochs: int = Field(default=3, gt=0)
    block_bytes: int = Field(default=0, ge=0)
    max_block_txs: int = Field(default=1000, ge=0)
    randshare_threshold: int | None = Field(default=None, gt=0)
    max_slot_lag: int = Field(default=MAX_SLOT_LAG, ge=0)
    # Slots SELECT waits for tickets from every validator still holding credit.
    ticket_wait_slots: int = Field(default=DEFAULT_TICKET_WAIT_SLOTS, ge=0)
    rewards: RewardPolicy = Field(default_factory=RewardPolicy)


class ValidatorState(BaseModel):
    """Mutable state of one validator; its tree and sessions are private to it."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    node_id: int
    keys: KeyPair
    params: MicrochainParams
    peers: tuple[int, ...]
    roster: dict[bytes, int]
    scheme: str | None = None
    equivocating: bool = False
    tree: ForkTree
    dynasty: Dynasty
    ledger: CreditLedger
    rng: np.random.Generator
    phase: Phase = Phase.PROPOSE
    epoch: int = 1
    slot: int = 0
    last_poc_slot: int | None = None
    poc_evaluations: int = 0
    member_slots: int = 0
    pool: dict[bytes, Transaction] = Field(default_factory=dict)
    seen_txs: set[bytes] = Field(default_factory=set)
    waiting: dict[bytes, list[Block]] = Field(default_factory=dict)
    proposals: dict[tuple[bytes, int], bytes] = Field(default_factory=dict)
    block_evidence: dict[bytes, EquivocationEvidence] = Field(default_factory=dict)
    votes: VoteBook = Field(default_factory=VoteBook)
    finalized: list[Checkpoint] = Field(default_factory=list)
    pending_checkpoint: Checkpoint | None = None
    session: RandShareSession | None = None
    seeds: list[bytes] = Field(default_factory=list)
    tickets: dict[bytes, SortitionTicket] = Field(default_factory=dict)
    ticket_wait: int = 0
    dynasties: list[Dynasty] = Field(default_factory=list)
    rejected: dict[str, int] = Field(default_factory=dict)

    @property
    def is_member(self) -> bool:
        return self.dynasty.is_member(self.keys.public)

    @property
    def boundary(self) -> int:
        return self.epoch * self.params.epoch_length

    @property
    def others(self) -> tuple[int, ...]:
        return tuple(p for p in self.peers if p != self.node_id)

    def node_of(self, pk: bytes) -> int:
        return self.roster[pk]


def _multicast(state: ValidatorState, payload: Any) -> Send:
    return send_to(payload, *state.others)


def _reject(state: ValidatorState, reason: str) -> None:
    state.rejected[reason] = state.rejected.get(reason, 0) + 1


def _slot_at(state: ValidatorState, at: float) -> int:
    return max(state.slot, math.floor(at / state.params.slot_ms + SLOT_EPSILON))


# Blocks


def _block_transactions(state: ValidatorState, slot: int, variant: bytes = b'') -> list[Transaction]:
    txs = list(state.pool.values())[: state.params.max_block_txs]
    target = state.params.block_bytes
    used = BLOCK_OVERHEAD_BYTES + sum(len(tx.canonical_bytes()) + 4 for tx in txs)
    pad = target - used - FILLER_OVERHEAD_BYTES
    if (target and pad > 0) or variant:
        filler = variant + bytes(max(0, pad))
        txs.append(make_transaction(state.keys, filler, slot))
    return txs


def _note_proposal(state: ValidatorState, block: Block) -> EquivocationEvidence | None:
    key = (block.header.proposer_pk, block.header.slot)
    earlier = state.proposals.setdefault(key, block.hash)
    if earlier == block.hash or block.header.proposer_pk in state.block_evidence:
        return None
    evidence = EquivocationEvidence(
        offender=block.header.proposer_pk,
        kind='double-block',
        epoch=state.epoch,
        first=earlier,
        second=block.hash,
    )
    state.block_evidence[block.header.proposer_pk] = evidence
    return evidence


def _propose(state: ValidatorState) -> list[Effect]:
    head = state.tree.head_block()
    attempt = poc_try_propose(
        state.keys,
        head,
        state.slot,
        state.dynasty,
        lambda: _block_transactions(state, state.slot),
        rho=state.params.rho,
        last_slot=state.last_poc_slot,
    )
    if attempt.violation is None:
        state.poc_evaluations += 1
        state.last_poc_slot = state.slot
    if attempt.block is None:
        return []
    blocks = [attempt.block]
    if state.equivocating:
        twin = poc_try_propose(
            state.keys,
            head,
            state.slot,
            state.dynasty,
            lambda: _block_transactions(state, state.slot, variant=b'equivocation'),
            rho=state.params.rho,
        )
        if twin.block is not None:
            blocks.append(twin.block)
    effects: list[Effect] = []
    for block in blocks:
        state.tree.insert_block(block)
        _note_proposal(state, block)
        effects.append(_multicast(state, BlockAnnounce(block=block)))
        data = {'block': block.hash.hex(), 'height': block.height, 'slot': state.slot}
        effects.append(Mark(label='block_proposed', data=data))
        effects.append(Mark(label='block_verified', data={'block': block.hash.hex(), 'member': True}))
    _drop_included(state, blocks[0])
    return effects


def _drop_included(state: ValidatorState, block: Block) -> None:
    for tx in block.transactions:
        state.pool.pop(tx.id, None)


def _on_block(state: ValidatorState, block: Block, now_slot: int) -> list[Effect]:
    effects: list[Effect] = []
    queue = [block]
    while queue:
        current = queue.pop(0)
        if current.hash in state.tree or current.hash in state.tree.pruned:
            continue
        reason = verify_block_poc(
            current,
            state.dynasty,
            state.tree,
            rho=state.params.rho,
            current_slot=now_slot,
            max_slot_lag=state.params.max_slot_lag,
            scheme=state.scheme,
        )
        if reason == 'unknown-parent':
            if sum(map(len, state.waiting.values())) >= state.tree.max_pending:
                _reject(state, 'orphan-overflow')
            else:
                state.waiting.setdefault(current.parent, []).append(current)
            continue
        if reason is not None:
            _reject(state, reason)
            logger.debug('validator %d rejected %s: %s', state.node_id, short_hex(current.hash), reason)
            continue
        try:
            state.tree.insert_block(current)
        except InvalidBlock as exc:
            _reject(state, exc.reason)
            continue
        evidence = _note_proposal(state, current)
        if evidence is not None:
            logger.info(
                'validator %d saw a double block by %s', state.node_id, short_hex(evidence.offender)
            )
            effects.append(Mark(label='equivocation', data=evidence.to_dict()))
        _drop_included(state, current)
        effects.append(
            Mark(label='block_verified', data={'block': current.hash.hex(), 'member': state.is_member})
        )
        queue.extend(state.waiting.pop(current.hash, []))
    if state.pending_checkpoint is not None and state.pending_checkpoint.block_hash in state.tree:
        effects.extend(_apply_finality(state, state.pending_checkpoint))
    return effects


# Votes and finality


def _vote(state: ValidatorState) -> list[Effect]:
    vote = cast_vote(state.keys, state.tree, state.dynasty, state.epoch)
    if vote is None:
        return []
    votes = [vote]
    if state.equivocating:
        shadow = vote.checkpoint.model_copy(
            update={'block_hash': hash_concat(b'conflict', vote.checkpoint.block_hash)}
        )
        votes.append(sign_vote(state.keys, shadow, state.dynasty.id))
    effects: list[Effect] = [
        Mark(
            label='vote_start',
            data={
                'epoch': state.epoch,
                'height': vote.checkpoint.height,
                'block': vote.checkpoint.block_hash.hex(),
            },
        )
    ]
    for v in votes:
        state.votes.add(v)
        effects.append(_multicast(state, VoteMsg(vote=v)))
    return effects + _tally(state)


def _on_vote(state: ValidatorState, payload: VoteMsg) -> list[Effect]:
    vote = payload.vote
    reason = vote_problem(vote, state.dynasty, state.scheme)
    if reason is not None:
        _reject(state, f'vote-{reason}')
        return []
    effects: list[Effect] = []
    evidence = state.votes.add(vote)
    if evidence is not None:
        logger.info('validator %d saw a double vote by %s', state.node_id, short_hex(evidence.offender))
        effects.append(Mark(label='equivocation', data=evidence.to_dict()))
    if vote.checkpoint.epoch == state.epoch:
        effects.extend(_tally(state))
    return effects


def _tally(state: ValidatorState) -> list[Effect]:
    result = tally_votes(
        state.votes.for_epoch(state.epoch), state.dynasty, epoch=state.epoch, scheme=state.scheme
    )
    if result.status == TallyStatus.CONFLICT:
        evidence = {'node': state.node_id, 'epoch': state.epoch, **result.evidence()}
        evidence['equivocators'] = [e.to_dict() for e in state.votes.evidence.values()]
        logger.error('validator %d detected conflicting finality in epoch %d', state.node_id, state.epoch)
        return [
            Mark(label='safety_violation', data=evidence),
            Halt(reason='conflicting-finality', evidence=evidence),
        ]
    if result.status == TallyStatus.FINALIZED and len(state.finalized) < state.epoch:
        checkpoint = result.checkpoint
        if checkpoint.block_hash not in state.tree:
            state.pending_checkpoint = checkpoint
            return []
        return _apply_finality(state, checkpoint)
    return []


def _apply_finality(state: ValidatorState, checkpoint: Checkpoint) -> list[Effect]:
    state.pending_checkpoint = None
    try:
        state.tree.finalize(checkpoint)
    except SafetyViolation as exc:
        evidence = {'node': state.node_id, 'epoch': checkpoint.epoch, 'reason': str(exc)}
        return [
            Mark(label='safety_violation', data=evidence),
            Halt(reason='finality-conflicts-chain', evidence=evidence),
        ]
    state.finalized.append(checkpoint)
    state.waiting = {
        parent: kept
        for parent, blocks in state.waiting.items()
        if (kept := [b for b in blocks if b.height > checkpoint.height])
    }
    logger.info(
        'validator %d finalized epoch %d at height %d', state.node_id, checkpoint.epoch, checkpoint.height
    )
    state.phase = Phase.DONE if len(state.finalized) >= state.params.epochs else Phase.DEAL
    data = {
        'epoch': checkpoint.epoch,
        'height': checkpoint.height,
        'block': checkpoint.block_hash.hex(),
        'member': state.is_member,
    }
    return [Mark(label='finalized', data=data)]


# Committee change


def _epoch_events(state: ValidatorState) -> EpochEvents:
    checkpoint = state.finalized[-1]
    previous_height = state.finalized[-2].height if len(state.finalized) > 1 else 0
    proposers = tuple(
        b.header.proposer_pk
        for b in state.tree.chain(checkpoint.block_hash)
        if b.height > previous_height
    )
    voters = sorted(
        {v.voter for v in state.votes.for_epoch(checkpoint.epoch) if v.checkpoint == checkpoint}
    )
    equivocators = frozenset(state.votes.evidence) | frozenset(state.block_evidence)
    return EpochEvents(
        slot=state.slot,
        finalized_proposers=proposers,
        correct_voters=tuple(voters),
        equivocators=equivocators,
    )


def _session(state: ValidatorState) -> RandShareSession:
    if state.session is None or state.session.dynasty.id != state.dynasty.id:
        state.session = RandShareSession(
            state.dynasty, state.dynasty.seed, state.params.randshare_threshold
        )
    return state.session


def _deal(state: ValidatorState) -> list[Effect]:
    state.ledger = apply_incentives(state.ledger, _epoch_events(state), state.params.rewards)
    session = _session(state)
    if not state.is_member:
        return []
    me = state.keys.public
    deal = deal_secret(state.dynasty, me, state.rng.bytes(32), session.t)
    session.add_deal(me, deal.commitments, deal.share(state.dynasty.index_of(me)))
    effects: list[Effect] = []
    for peer in state.others:
        pk = next(k for k, v in state.roster.items() if v == peer)
        share = deal.share(state.dynasty.index_of(pk)) if state.dynasty.is_member(pk) else None
        msg = DealMsg(dealer=me, dynasty_id=state.dynasty.id, commitments=deal.commitments, share=share)
        effects.append(send_to(msg, peer))
    return effects


def _reveal(state: ValidatorState) -> list[Effect]:
    session = _session(state)
    if not state.is_member:
        return []
    held = session.my_reveal()
    session.add_reveal(state.keys.public, held)
    msg = RevealMsg(
        revealer=state.keys.public,
        dynasty_id=state.dynasty.id,
        dealers=tuple(d for d, _ in held),
        shares=tuple(s for _, s in held),
    )
    return [_multicast(state, msg)]


def _publish_ticket(state: ValidatorState) -> list[Effect]:
    output = _session(state).combine()
    state.seeds.append(output.seed)
    ticket = make_ticket(state.keys, output.seed, state.dynasty.id + 1, state.scheme)
    state.tickets[state.keys.public] = ticket
    return [
        Mark(label='randshare', data={'seed': output.seed.hex(), 'fallback': output.fallback}),
        _multicast(state, TicketMsg(ticket=ticket)),
    ]


def _committee_size(state: ValidatorState) -> int:
    """Configured K, or every validator still holding credit."""
    return state.params.committee_size or sum(1 for c in state.ledger.credits.values() if c > 0)


def _select(state: ValidatorState) -> list[Effect]:
    """
    Select the next dynasty once every credited validator's ticket is in.

    Waits up to `ticket_wait_slots` slots for missing tickets. When fewer than
    K candidates hold valid tickets, the previous committee carries over
    into the next dynasty on the new seed.
    """
    seed = state.seeds[-1]
    credits = state.ledger.credits
    missing = [pk for pk, c in credits.items() if c > 0 and pk not in state.tickets]
    if missing and state.ticket_wait < state.params.ticket_wait_slots:
        state.ticket_wait += 1
        return []
    k = _committee_size(state)
    shortfall: InsufficientCandidates | None = None
    try:
        dynasty = select_committee(
            list(state.tickets.values()),
            credits,
            seed,
            k,
            dynasty_id=state.dynasty.id + 1,
            start_height=state.boundary,
            scheme=state.scheme,
        )
    except InsufficientCandidates as exc:
        logger.warning(
            'validator %d keeps dynasty %d for another epoch: %s', state.node_id, state.dynasty.id, exc
        )
        shortfall = exc
        dynasty = state.dynasty.model_copy(
            update={'id': state.dynasty.id + 1, 'seed': seed, 'start_height': state.boundary}
        )
    state.dynasty = dynasty
    state.tickets = {}
    state.ticket_wait = 0
    state.dynasties.append(dynasty)
    state.epoch += 1
    state.phase = Phase.PROPOSE
    data: dict[str, Any] = {'id': dynasty.id, 'members': sorted(state.node_of(pk) for pk in dynasty.pks)}
    if shortfall is not None:
        data |= {'fallback': True, 'k': shortfall.k, 'candidates': shortfall.available}
    return [Mark(label='dynasty', data=data)]


# Step


def _on_slot(state: ValidatorState) -> list[Effect]:
    match state.phase:
        case Phase.PROPOSE:
            if state.tree.head_block().height >= state.boundary:
                state.phase = Phase.VOTE
                return _vote(state) if state.is_member else []
            if state.is_member:
                state.member_slots += 1
                return _propose(state)
        case Phase.DEAL:
            state.phase = Phase.REVEAL
            return _deal(state)
        case Phase.REVEAL:
            state.phase = Phase.TICKETS
            return _reveal(state)
        case Phase.TICKETS:
            state.phase = Phase.SELECT
            return _publish_ticket(state)
        case Phase.SELECT:
            return _select(state)
    return []


def validator_step(state: ValidatorState, event: Event) -> tuple[ValidatorState, list[Effect]]:
    match event:
        case Start(at=at):
            next_tick = (math.floor(at / state.params.slot_ms + SLOT_EPSILON) + 1) * state.params.slot_ms
            return state, [SetTimer(name='slot', delay_ms=next_tick - at)]
        case Fire(name='slot', at=at):
            state.slot = round(at / state.params.slot_ms)
            effects = _on_slot(state)
            if state.phase != Phase.DONE:
                effects.append(SetTimer(name='slot', delay_ms=state.params.slot_ms))
            return state, effects
        case Deliver(envelope=envelope, at=at):
            return state, _on_message(state, envelope.payload, at)
    return state, []


def _on_message(state: ValidatorState, payload: Any, at: float) -> list[Effect]:
    match payload:
        case TxAnnounce(tx=tx):
            if tx.id in state.seen_txs or not verify_transaction(tx, state.scheme):
                return []
            state.seen_txs.add(tx.id)
            state.pool[tx.id] = tx
            return [Mark(label='tx_held', data={'tx': tx.id.hex(), 'member': state.is_member})]
        case BlockAnnounce(block=block):
            return _on_block(state, block, _slot_at(state, at))
        case VoteMsg():
            return _on_vote(state, payload)
        case DealMsg() if payload.dynasty_id == state.dynasty.id:
            _session(state).add_deal(payload.dealer, payload.commitments, payload.share)
        case RevealMsg() if payload.dynasty_id == state.dynasty.id:
            _session(state).add_reveal(payload.revealer, list(zip(payload.dealers, payload.shares)))
        case TicketMsg(ticket=ticket) if ticket.dynasty_id == state.dynasty.id + 1:
            state.tickets.setdefault(ticket.pk, ticket)
    return []


def validator_snapshot(state: ValidatorState) -> dict[str, Any]:
    return {
        'phase': str(state.phase),
        'epoch': state.epoch,
        'head_height': state.tree.head_block().height,
        'finalized_height': state.tree.finalized_height,
        'poc_evaluations': state.poc_evaluations,
        'member_slots': state.member_slots,
        'credit': state.ledger.credit_of(state.keys.public),
    }


# Workload


class WorkloadClientState(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    node_id: int
    keys: KeyPair
    validators: tuple[int, ...]
    interval_ms: float = Field(gt=0)
    count: int = Field(ge=0)
    payload_bytes: int = Field(default=1024, ge=0)
    sent: int = 0


def _send_tx(state: WorkloadClientState, at: float) -> list[Effect]:
    label = f'tx-{state.node_id}-{state.sent}'.encode()
    payload = label + bytes(max(0, state.payload_bytes - len(label)))
    tx = make_transaction(state.keys, payload, int(at))
    state.sent += 1
    effects: list[Effect] = [
        send_to(TxAnnounce(tx=tx), *state.validators),
        Mark(label='tx_sent', data={'tx': tx.id.hex()}),
    ]
    if state.sent < state.count:
        effects.append(SetTimer(name='tx', delay_ms=state.interval_ms))
    return effects


def workload_step(
    state: WorkloadClientState, event: Event
) -> tuple[WorkloadClientState, list[Effect]]:
    """Send `count` transactions to every validator, one per interval."""
    match event:
        case Start(at=at) if state.count > 0:
            return state, _send_tx(state, at)
        case Fire(name='tx', at=at):
            return state, _send_tx(state, at)
    return state, []


