"""Microchain: credit-weighted final committees with Proof-of-Credit and voting finality."""

from src.core.microchain.dynasty import (
    GENESIS_SEED,
    Dynasty,
    Member,
    genesis_init,
    make_dynasty,
)
from src.core.microchain.errors import (
    ConflictingFinality,
    DuplicateValidator,
    EmptyValidatorSet,
    InsufficientCandidates,
    InvalidPocParameters,
    MicrochainError,
)
from src.core.microchain.incentives import (
    CreditCause,
    CreditEvent,
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
from src.core.microchain.poc import (
    DEFAULT_RHO,
    MAX_SLOT_LAG,
    TARGET_BITS,
    PocAttempt,
    eligibility_value,
    poc_eligible,
    poc_target,
    poc_try_propose,
    verify_block_poc,
)
from src.core.microchain.randshare import (
    RandShareOutcome,
    RandShareOutput,
    RandShareSession,
    SessionStatus,
    deal_secret,
    default_threshold,
    fallback_seed,
    run_randshare,
)
from src.core.microchain.simulation import (
    SAFETY_HALTS,
    MicrochainOutcome,
    microchain_run,
)
from src.core.microchain.sortition import (
    SortitionTicket,
    draw_committee,
    make_ticket,
    select_committee,
    selection_key,
    sortition_input,
    verify_ticket,
)
from src.core.microchain.validator import (
    MicrochainParams,
    Phase,
    ValidatorState,
    WorkloadClientState,
    validator_snapshot,
    validator_step,
    workload_step,
)
from src.core.microchain.voting import (
    EquivocationEvidence,
    TallyResult,
    TallyStatus,
    Vote,
    VoteBook,
    cast_vote,
    checkpoint_on,
    sign_vote,
    tally_votes,
    vote_problem,
)

__all__ = [
    'GENESIS_SEED',
    'Dynasty',
    'Member',
    'genesis_init',
    'make_dynasty',
    'SortitionTicket',
    'draw_committee',
    'make_ticket',
    'select_committee',
    'selection_key',
    'sortition_input',
    'verify_ticket',
    'DEFAULT_RHO',
    'MAX_SLOT_LAG',
    'TARGET_BITS',
    'PocAttempt',
    'eligibility_value',
    'poc_eligible',
    'poc_target',
    'poc_try_propose',
    'verify_block_poc',
    'EquivocationEvidence',
    'TallyResult',
    'TallyStatus',
    'Vote',
    'VoteBook',
    'cast_vote',
    'checkpoint_on',
    'sign_vote',
    'tally_votes',
    'vote_problem',
    'RandShareOutcome',
    'RandShareOutput',
    'RandShareSession',
    'SessionStatus',
    'deal_secret',
    'default_threshold',
    'fallback_seed',
    'run_randshare',
    'CreditCause',
    'CreditEvent',
    'CreditLedger',
    'EpochEvents',
    'RewardPolicy',
    'apply_incentives',
    'BlockAnnounce',
    'DealMsg',
    'RevealMsg',
    'TicketMsg',
    'TxAnnounce',
    'VoteMsg',
    'MicrochainParams',
    'Phase',
    'ValidatorState',
    'WorkloadClientState',
    'validator_snapshot',
    'validator_step',
    'workload_step',
    'SAFETY_HALTS',
    'MicrochainOutcome',
    'microchain_run',
    'MicrochainError',
    'EmptyValidatorSet',
    'DuplicateValidator',
    'InsufficientCandidates',
    'InvalidPocParameters',
    'ConflictingFinality',
]
