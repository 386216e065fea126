"""
Networked Nakamoto miners: honest gossip and the withhold-and-release selfish policy.

Each miner holds its own fork tree and a private exponential clock ('mine'
timer). Because the clock is memoryless, re-targeting onto a new head only
means building the next block on whatever head is current when it fires.
"""

import logging
from collections.abc import Sequence
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.core.crypto import KeyPair, keygen, short_hex
from src.core.ledger import Block, ForkTree, InvalidBlock, build_block
from src.core.nakamoto.analytic import (
    REFERENCE_DEPTH,
    MinerConfig,
    MinerPolicy,
    MiningSchedule,
    schedule_next_block,
)
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
)
from src.core.rng import substream

logger = logging.getLogger(__name__)

DEFAULT_DIFFICULTY_MS = 10_000.0


class BlockGossip(Message):
    TAG = 0x30

    block: Block


class MinerState(BaseModel):
    """Mutable per-miner state; the tree is owned by this miner alone."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    node_id: int
    config: MinerConfig
    keys: KeyPair
    schedule: MiningSchedule
    rng: np.random.Generator
    tree: ForkTree
    mining_tip: bytes
    private: list[Block] = Field(default_factory=list)
    public_height: int = 0
    mined: int = 0
    rejected: int = 0


def _arm(state: MinerState, now: float) -> list[Effect]:
    at = schedule_next_block(state.config, now, state.schedule, state.rng)
    if at is None:
        return []
    return [SetTimer(name='mine', delay_ms=at - now)]


def _mine(state: MinerState, now: float) -> Block:
    parent = state.tree.get(state.mining_tip)
    block = build_block(
        state.keys,
        parent,
        slot=int(now),
        dynasty_id=0,
        credit=0,
        nonce=state.mined,
    )
    state.tree.insert_block(block)
    state.mined += 1
    state.mining_tip = block.hash
    return block


def fork_depth(tree: ForkTree, old: bytes, new: bytes) -> int:
    """Blocks of the old chain abandoned when the head moves from `old` to `new`."""
    a, b = tree.get(old), tree.get(new)
    while a.hash != b.hash:
        if a.height >= b.height:
            a = tree.get(a.parent)
        else:
            b = tree.get(b.parent)
    return tree.get(old).height - a.height


def _receive(state: MinerState, block: Block) -> bool:
    try:
        outcome = state.tree.insert_block(block)
    except InvalidBlock as exc:
        state.rejected += 1
        logger.debug('miner %d rejected %s: %s', state.node_id, short_hex(block.hash), exc.reason)
        return False
    for attached in outcome.attached:
        state.public_height = max(state.public_height, state.tree.get(attached).height)
    return bool(outcome.attached)


def honest_miner_step(state: MinerState, event: Event) -> tuple[MinerState, list[Effect]]:
    """
    Mine on the longest head and gossip every block the moment it is found.

    A received block is validated into the fork tree; when the fork-choice
    head moves, mining switches to it and a 'reorg' mark records how many
    blocks of the previous chain were abandoned.
    """
    match event:
        case Start(at=at):
            return state, _arm(state, at)
        case Fire(name='mine', at=at):
            state.mining_tip = state.tree.longest_chain_head()
            block = _mine(state, at)
            state.public_height = max(state.public_height, block.height)
            return state, [
                broadcast(BlockGossip(block=block)),
                Mark(label='block_mined', data={'miner': state.node_id, 'height': block.height}),
                *_arm(state, at),
            ]
        case Deliver(envelope=envelope) if isinstance(envelope.payload, BlockGossip):
            old = state.mining_tip
            if not _receive(state, envelope.payload.block):
                return state, []
            new = state.tree.longest_chain_head()
            if new == old:
                return state, []
            state.mining_tip = new
            effects: list[Effect] = [Mark(label='head_changed', data={'height': state.tree.get(new).height})]
            depth = fork_depth(state.tree, old, new)
            if depth:
                effects.append(Mark(label='reorg', data={'depth': depth}))
            return state, effects
    return state, []


def selfish_miner_step(state: MinerState, event: Event) -> tuple[MinerState, list[Effect]]:
    """
    Withhold newly mined blocks on a private branch.

    After each public block the lead is private tip height minus public
    height: below zero the private branch is discarded and the public head
    adopted; at zero or one the whole private branch is released; above one
    the miner keeps withholding. After a release the miner keeps mining on
    its own tip, so it wins ties it already knows about.
    """
    match event:
        case Start(at=at):
            return state, _arm(state, at)
        case Fire(name='mine', at=at):
            block = _mine(state, at)
            state.private.append(block)
            return state, [
                Mark(label='block_mined', data={'miner': state.node_id, 'height': block.height}),
                *_arm(state, at),
            ]
        case Deliver(envelope=envelope) if isinstance(envelope.payload, BlockGossip):
            if not _receive(state, envelope.payload.block):
                return state, []
            if not state.private:
                head = state.tree.longest_chain_head()
                if state.tree.get(head).height > state.tree.get(state.mining_tip).height:
                    state.mining_tip = head
                return state, []
            lead = state.private[-1].height - state.public_height
            if lead < 0:
                discarded = len(state.private)
                state.private.clear()
                state.mining_tip = state.tree.longest_chain_head()
                return state, [Mark(label='selfish_adopt', data={'discarded': discarded})]
            if lead <= 1:
                released = state.private
                state.private = []
                state.public_height = max(state.public_height, released[-1].height)
                return state, [
                    *(broadcast(BlockGossip(block=block)) for block in released),
                    Mark(label='selfish_release', data={'blocks': len(released), 'lead': lead}),
                ]
    return state, []


def miner_snapshot(state: MinerState) -> dict[str, Any]:
    return {
        'head': state.tree.longest_chain_head().hex(),
        'height': state.tree.head_block().height,
        'mined': state.mined,
        'private': len(state.private),
    }


class NakamotoOutcome(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int
    difficulty_ms: float
    mined: dict[int, int]
    main_chain: dict[int, int]
    reorg_depths: tuple[int, ...]
    common_prefix: bool
    trace: Trace

    @property
    def total_mined(self) -> int:
        return sum(self.mined.values())

    @property
    def main_chain_length(self) -> int:
        return sum(self.main_chain.values())

    @property
    def orphans(self) -> int:
        return self.total_mined - self.main_chain_length

    @property
    def shares(self) -> dict[int, float]:
        """Fraction of main-chain blocks proposed by each miner."""
        total = max(1, self.main_chain_length)
        return {miner: count / total for miner, count in self.main_chain.items()}

    @property
    def messages_per_block(self) -> float:
        """Gossip sends per mined block; N - 1 when every block is published."""
        return self.trace.sent['BlockGossip'] / max(1, self.total_mined)


def common_prefix_holds(chains: Sequence[list[bytes]], depth: int) -> bool:
    """True when every pair of chains, each cut `depth` blocks short, is prefix-ordered."""
    cut = [chain[: max(1, len(chain) - depth)] for chain in chains]
    for a in cut:
        for b in cut:
            shorter, longer = (a, b) if len(a) <= len(b) else (b, a)
            if longer[: len(shorter)] != shorter:
                return False
    return True


def nakamoto_run(
    miners: Sequence[MinerConfig] | int,
    adversary: AdversarySpec | None = None,
    model: SynchronyModel | None = None,
    seed: int = 0,
    *,
    blocks: int = 100,
    difficulty_ms: float = DEFAULT_DIFFICULTY_MS,
    depth: int = REFERENCE_DEPTH,
    scheme: str | None = None,
) -> NakamotoOutcome:
    """
    Simulate a mining network for about `blocks` block intervals.

    Args:
        miners: Miner configurations, or a count of equal honest miners.
        adversary: Network-level behaviours (crashes, delays).
        model: Gossip network model; delays should be far below the interval.
        seed: Run seed; each miner's clock draws from its own 'mining' substream.
        blocks: Run length in expected block intervals.
        difficulty_ms: Mean network block interval T.
        depth: Confirmation depth for the common-prefix check.
        scheme: Signature scheme for block signatures.

    Returns:
        Mining counts, main-chain composition seen by the first honest
        miner, reorg depths and the trace.
    """
    if isinstance(miners, int):
        miners = [MinerConfig() for _ in range(miners)]
    schedule = MiningSchedule(
        difficulty_ms=difficulty_ms, weights=tuple(m.hash_power for m in miners)
    )
    nodes = []
    for i, config in enumerate(miners):
        keys = keygen(f'miner-{i}', scheme)
        tree = ForkTree(scheme=scheme)
        state = MinerState(
            node_id=i,
            config=config.model_copy(update={'pk': keys.public}),
            keys=keys,
            schedule=schedule,
            rng=substream(seed, 'mining', i),
            tree=tree,
            mining_tip=tree.genesis,
        )
        step = selfish_miner_step if config.policy == MinerPolicy.SELFISH else honest_miner_step
        nodes.append(StateMachineNode(i, state, step, miner_snapshot))

    trace = run(nodes, adversary, model, seed, until_ms=blocks * difficulty_ms)

    honest = [node for node in nodes if node.state.config.honest] or nodes
    reference = honest[0].state.tree
    owner = {node.state.keys.public: node.node_id for node in nodes}
    main_chain = {node.node_id: 0 for node in nodes}
    for block in reference.chain()[1:]:
        main_chain[owner[block.header.proposer_pk]] += 1
    chains = [[b.hash for b in node.state.tree.chain()] for node in honest]
    logger.info(
        'nakamoto run: %d miners, %d mined, main chain %d',
        len(nodes),
        sum(node.state.mined for node in nodes),
        sum(main_chain.values()),
    )
    return NakamotoOutcome(
        n=len(nodes),
        difficulty_ms=difficulty_ms,
        mined={node.node_id: node.state.mined for node in nodes},
        main_chain=main_chain,
        reorg_depths=tuple(r.data['depth'] for r in trace.marks('reorg') if r.data),
        common_prefix=common_prefix_holds(chains, depth),
        trace=trace,
    )
