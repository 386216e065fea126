"""Run a Microchain validator set and a workload client over the network simulator."""

import logging
from collections.abc import Collection, Sequence
from typing import Any

from pydantic import BaseModel, ConfigDict

from src.core.crypto import keygen
from src.core.ledger import Block, Checkpoint
from src.core.microchain.dynasty import genesis_init
from src.core.microchain.errors import ConflictingFinality
from src.core.microchain.incentives import CreditEvent, CreditLedger
from src.core.microchain.validator import (
    MicrochainParams,
    ValidatorState,
    WorkloadClientState,
    validator_snapshot,
    validator_step,
    workload_step,
)
from src.core.netsim import (
    DEFAULT_EVENT_BUDGET,
    AdversarySpec,
    StateMachineNode,
    SynchronyModel,
    Trace,
    run,
)
from src.core.rng import substream

logger = logging.getLogger(__name__)

SAFETY_HALTS = frozenset({'conflicting-finality', 'finality-conflicts-chain'})
DEFAULT_VALIDATORS = 4


class MicrochainOutcome(BaseModel):
    """What a run produced, seen from node ids rather than public keys."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int
    params: MicrochainParams
    honest: tuple[int, ...]
    finalized: dict[int, tuple[Checkpoint, ...]]
    credits: dict[int, int]
    credit_log: tuple[CreditEvent, ...]
    dynasties: tuple[tuple[int, ...], ...]
    seeds: dict[int, tuple[bytes, ...]]
    poc_evaluations: dict[int, int]
    member_slots: dict[int, int]
    proposers: dict[int, int]
    chain: tuple[Block, ...]
    trace: Trace

    @property
    def halted(self) -> str | None:
        return self.trace.halted

    @property
    def evidence(self) -> dict[str, Any] | None:
        return self.trace.evidence

    @property
    def safe(self) -> bool:
        return self.trace.halted not in SAFETY_HALTS

    @property
    def finalized_epochs(self) -> int:
        """Epochs finalized by every honest validator."""
        return min((len(self.finalized[i]) for i in self.honest), default=0)

    @property
    def agreed(self) -> bool:
        """Honest validators finalized the same checkpoints, up to the shortest list."""
        lists = [self.finalized[i] for i in self.honest]
        depth = min((len(f) for f in lists), default=0)
        return len({f[:depth] for f in lists}) <= 1

    @property
    def randshare_agreed(self) -> bool:
        lists = [self.seeds[i] for i in self.honest]
        depth = min((len(s) for s in lists), default=0)
        return len({s[:depth] for s in lists}) <= 1

    def check_safety(self) -> None:
        """
        Raises:
            ConflictingFinality: If a validator halted the run on conflicting finality.
        """
        if not self.safe:
            evidence = self.evidence or {}
            raise ConflictingFinality(int(evidence.get('epoch', 0)), evidence)


def microchain_run(
    validators: Sequence[int] | int = DEFAULT_VALIDATORS,
    *,
    equivocating: Collection[int] = (),
    key_seeds: Sequence[str] | None = None,
    params: MicrochainParams | None = None,
    model: SynchronyModel | None = None,
    adversary: AdversarySpec | None = None,
    seed: int = 0,
    scheme: str | None = None,
    tx_count: int = 1,
    tx_interval_ms: float | None = None,
    tx_bytes: int = 1024,
    until_ms: float | None = None,
    event_budget: int = DEFAULT_EVENT_BUDGET,
) -> MicrochainOutcome:
    """
    Simulate validators 0..N-1 and a workload client N until `params.epochs` finalize.

    Args:
        validators: Genesis credit of each validator, or a count of unit-credit validators.
        equivocating: Validators that double-propose and double-vote.
        key_seeds: Key seed of each validator; `validator-<i>` by default.
        params: Protocol parameters.
        model: Network model; the slot should exceed its delay bound.
        adversary: Network-level behaviours (crashes, delays, withholding).
        seed: Run seed; secrets come from the 'randshare' substream.
        scheme: Signature scheme for blocks, votes and transactions.
        tx_count: Transactions the client sends, starting at time 0.
        tx_interval_ms: Gap between client transactions (one slot by default).
        tx_bytes: Payload size of each client transaction.
        until_ms: Hard stop; by default 3E + 10 slots per epoch.
        event_budget: Simulator event cap.

    Returns:
        Per-node finality, credits, dynasties and PoC counters plus the trace.

    Raises:
        EmptyValidatorSet: If no validator holds credit.
    """
    params = params or MicrochainParams()
    credits = [1] * validators if isinstance(validators, int) else list(validators)
    n = len(credits)
    seeds = key_seeds or [f'validator-{i}' for i in range(n)]
    keys = [keygen(s, scheme) for s in seeds]
    roster = [(k.public, c) for k, c in zip(keys, credits, strict=True)]
    node_of = {k.public: i for i, k in enumerate(keys)}

    nodes: list[StateMachineNode] = []
    for i in range(n):
        _, tree, dynasty = genesis_init(roster, epoch_length=params.epoch_length, scheme=scheme)
        state = ValidatorState(
            node_id=i,
            keys=keys[i],
            params=params,
            peers=tuple(range(n)),
            roster=node_of,
            scheme=scheme,
            equivocating=i in equivocating,
            tree=tree,
            dynasty=dynasty,
            ledger=CreditLedger.from_roster(roster),
            rng=substream(seed, 'randshare', i),
        )
        nodes.append(StateMachineNode(i, state, validator_step, validator_snapshot))
    client = WorkloadClientState(
        node_id=n,
        keys=keygen('workload-client', scheme),
        validators=tuple(range(n)),
        interval_ms=tx_interval_ms or params.slot_ms,
        count=tx_count,
        payload_bytes=tx_bytes,
    )
    nodes.append(StateMachineNode(n, client, workload_step))

    stop = until_ms or params.epochs * (3 * params.epoch_length + 10) * params.slot_ms
    trace = run(nodes, adversary, model, seed, until_ms=stop, event_budget=event_budget)

    validator_states: list[ValidatorState] = [node.state for node in nodes[:n]]
    honest = tuple(i for i in range(n) if i not in equivocating) or tuple(range(n))
    reference = validator_states[honest[0]]
    head = reference.finalized[-1].block_hash if reference.finalized else None
    chain = tuple(reference.tree.chain(head))
    proposers = {i: 0 for i in range(n)}
    for block in chain[1:]:
        proposers[node_of[block.header.proposer_pk]] += 1
    dynasties = [genesis_init(roster, epoch_length=params.epoch_length)[2], *reference.dynasties]
    logger.info(
        'microchain run: %d validators, %d epochs finalized, halted=%s',
        n,
        len(reference.finalized),
        trace.halted,
    )
    return MicrochainOutcome(
        n=n,
        params=params,
        honest=honest,
        finalized={s.node_id: tuple(s.finalized) for s in validator_states},
        credits={node_of[pk]: c for pk, c in reference.ledger.credits.items()},
        credit_log=reference.ledger.log,
        dynasties=tuple(tuple(sorted(node_of[pk] for pk in d.pks)) for d in dynasties),
        seeds={s.node_id: tuple(s.seeds) for s in validator_states},
        poc_evaluations={s.node_id: s.poc_evaluations for s in validator_states},
        member_slots={s.node_id: s.member_slots for s in validator_states},
        proposers=proposers,
        chain=chain,
        trace=trace,
    )
