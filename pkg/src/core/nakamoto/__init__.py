"""Nakamoto consensus: mining probabilities, Monte-Carlo oracles and networked miners."""

from src.core.nakamoto.analytic import (
    REFERENCE_DEPTH,
    MinerConfig,
    MinerPolicy,
    MiningSchedule,
    attacker_overtake_prob,
    pow_win_prob,
    schedule_next_block,
)
from src.core.nakamoto.errors import InvalidRaceParameters, InvalidWeights, NakamotoError
from src.core.nakamoto.miner import (
    DEFAULT_DIFFICULTY_MS,
    BlockGossip,
    MinerState,
    NakamotoOutcome,
    common_prefix_holds,
    fork_depth,
    honest_miner_step,
    miner_snapshot,
    nakamoto_run,
    selfish_miner_step,
)
from src.core.nakamoto.montecarlo import (
    OvertakeResult,
    RaceResult,
    SelfishRevenue,
    mining_race,
    overtake_trials,
    selfish_revenue,
)

__all__ = [
    'REFERENCE_DEPTH',
    'DEFAULT_DIFFICULTY_MS',
    'MinerConfig',
    'MinerPolicy',
    'MiningSchedule',
    'attacker_overtake_prob',
    'pow_win_prob',
    'schedule_next_block',
    'BlockGossip',
    'MinerState',
    'NakamotoOutcome',
    'common_prefix_holds',
    'fork_depth',
    'honest_miner_step',
    'miner_snapshot',
    'nakamoto_run',
    'selfish_miner_step',
    'OvertakeResult',
    'RaceResult',
    'SelfishRevenue',
    'mining_race',
    'overtake_trials',
    'selfish_revenue',
    'NakamotoError',
    'InvalidWeights',
    'InvalidRaceParameters',
]
