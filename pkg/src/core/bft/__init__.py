"""Classical fault-tolerant baselines: Oral Messages, Viewstamped Replication and PBFT."""

from src.core.bft.errors import BftError, InvalidFaultBound, QuorumInfeasible
from src.core.bft.om import (
    DEFAULT_ORDER,
    OmOutcome,
    OmState,
    OmValue,
    OmWitness,
    Order,
    eig_decide,
    om_decisions,
    om_depth,
    om_message_count,
    om_run,
    om_search,
    om_step,
    parse_order,
)
from src.core.bft.pbft import (
    DEFAULT_CHECKPOINT_INTERVAL,
    ClientDecision,
    PbftClientState,
    PbftCommit,
    PbftConfig,
    PbftOutcome,
    PbftPrepare,
    PbftPrePrepare,
    PbftReplicaState,
    PbftReply,
    PbftRequest,
    PbftStatus,
    pbft_client_accept,
    pbft_client_step,
    pbft_run,
    pbft_step,
)
from src.core.bft.quorum import (
    BftProtocol,
    QuorumParams,
    check_roster,
    majority,
    quorum_params,
)
from src.core.bft.vr import (
    VrClientState,
    VrCommit,
    VrEntry,
    VrOutcome,
    VrPrepare,
    VrPrepareOk,
    VrReplicaState,
    VrReply,
    VrRequest,
    VrStartViewChange,
    VrStatus,
    prefix_consistent,
    vr_client_step,
    vr_run,
    vr_step,
)

__all__ = [
    'BftError',
    'InvalidFaultBound',
    'QuorumInfeasible',
    'BftProtocol',
    'QuorumParams',
    'check_roster',
    'majority',
    'quorum_params',
    'DEFAULT_ORDER',
    'Order',
    'OmOutcome',
    'OmState',
    'OmValue',
    'OmWitness',
    'eig_decide',
    'om_decisions',
    'om_depth',
    'om_message_count',
    'om_run',
    'om_search',
    'om_step',
    'parse_order',
    'VrClientState',
    'VrCommit',
    'VrEntry',
    'VrOutcome',
    'VrPrepare',
    'VrPrepareOk',
    'VrReplicaState',
    'VrReply',
    'VrRequest',
    'VrStartViewChange',
    'VrStatus',
    'prefix_consistent',
    'vr_client_step',
    'vr_run',
    'vr_step',
    'DEFAULT_CHECKPOINT_INTERVAL',
    'ClientDecision',
    'PbftClientState',
    'PbftCommit',
    'PbftConfig',
    'PbftOutcome',
    'PbftPrepare',
    'PbftPrePrepare',
    'PbftReplicaState',
    'PbftReply',
    'PbftRequest',
    'PbftStatus',
    'pbft_client_accept',
    'pbft_client_step',
    'pbft_run',
    'pbft_step',
]
