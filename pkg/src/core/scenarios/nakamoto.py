"""Nakamoto scenarios: overtake probability, selfish-mining revenue and mining shares."""

import logging
from typing import TYPE_CHECKING, Any

from src.core.nakamoto import (
    MinerPolicy,
    attacker_overtake_prob,
    mining_race,
    nakamoto_run,
    overtake_trials,
    pow_win_prob,
    selfish_revenue,
)
from src.core.rng import substream
from src.core.scenarios.pool import parallel_map
from src.core.scenarios.registry import scenario
from src.core.scenarios.report import ScenarioReport

if TYPE_CHECKING:
    from src.core.run.config import SimConfig

logger = logging.getLogger(__name__)

OVERTAKE_TOLERANCE = 0.2


def overtake_cell(job: tuple[int, int, float, int, int]) -> dict[str, Any]:
    seed, index, p, m, trials = job
    result = overtake_trials(p, m, trials, substream(seed, 'mining', index))
    analytic = attacker_overtake_prob(p, m)
    return {
        'p': p,
        'm': m,
        'trials': trials,
        'successes': result.successes,
        'unresolved': result.unresolved,
        'empirical': result.rate,
        'analytic': analytic,
        'rel_error': abs(result.rate - analytic) / analytic if analytic else None,
    }


@scenario(
    'attacker-overtake',
    'nakamoto',
    'Monte-Carlo chance of an attacker making up an m-block deficit against (p/(1-p))^m',
)
def attacker_overtake_scenario(config: 'SimConfig', workers: int = 1) -> ScenarioReport:
    sweep = config.sweep
    cells = [(p, m) for p in sweep.probabilities for m in sweep.depths]
    jobs = [(config.seed, i, p, m, config.nakamoto.trials) for i, (p, m) in enumerate(cells)]
    rows = parallel_map(overtake_cell, jobs, workers)
    checked = [r for r in rows if r['p'] < 0.5 and r['rel_error'] is not None]
    worst = max((r['rel_error'] for r in checked), default=0.0)
    return ScenarioReport(
        scenario='attacker-overtake',
        protocol='nakamoto',
        seed=config.seed,
        summary={
            'trials': config.nakamoto.trials,
            'max_rel_error': worst,
            'within_tolerance': worst <= OVERTAKE_TOLERANCE,
            'half_share_rates': {r['m']: r['empirical'] for r in rows if r['p'] == 0.5},
        },
        rows=rows,
    )


def revenue_point(job: tuple[int, int, float, float, int]) -> dict[str, Any]:
    seed, index, alpha, gamma, blocks = job
    result = selfish_revenue(alpha, blocks, substream(seed, 'mining', index), gamma=gamma)
    return {
        'alpha': alpha,
        'gamma': gamma,
        'share': result.share,
        'gain': result.share - alpha,
        'attacker_blocks': result.attacker_blocks,
        'honest_blocks': result.honest_blocks,
        'orphaned': result.orphaned,
    }


@scenario(
    'selfish-mining',
    'nakamoto',
    'Main-chain revenue share of a selfish miner against its hash share',
)
def selfish_mining_scenario(config: 'SimConfig', workers: int = 1) -> ScenarioReport:
    sweep = config.sweep
    jobs = [
        (config.seed, i, alpha, sweep.gamma, config.nakamoto.revenue_blocks)
        for i, alpha in enumerate(sorted(sweep.alphas))
    ]
    rows = parallel_map(revenue_point, jobs, workers)
    profitable = next((r['alpha'] for r in rows if r['gain'] > 0), None)
    summary: dict[str, Any] = {
        'gamma': sweep.gamma,
        'blocks': config.nakamoto.revenue_blocks,
        'profitable_from': profitable,
    }
    traces = {}
    selfish = [i for i, node in enumerate(config.nodes) if node.policy == MinerPolicy.SELFISH]
    if selfish:
        outcome = nakamoto_run(
            config.miners,
            config.adversary,
            config.network,
            config.seed,
            blocks=config.nakamoto.blocks,
            difficulty_ms=config.nakamoto.difficulty_ms,
            depth=config.nakamoto.depth,
            scheme=config.scheme,
        )
        weights = [m.hash_power for m in config.miners]
        summary['network'] = {
            'selfish': selfish,
            'hash_share': sum(pow_win_prob(weights, i) for i in selfish),
            'chain_share': sum(outcome.shares[i] for i in selfish),
            'orphans': outcome.orphans,
        }
        traces['nakamoto'] = outcome.trace
    return ScenarioReport(
        scenario='selfish-mining',
        protocol='nakamoto',
        seed=config.seed,
        summary=summary,
        rows=rows,
        traces=traces,
    )


@scenario(
    'mining-share',
    'nakamoto',
    'Per-miner block share against w_i / sum(w), from the race oracle and a gossiping network',
)
def mining_share_scenario(config: 'SimConfig', workers: int = 1) -> ScenarioReport:  # noqa: ARG001
    weights = [m.hash_power for m in config.miners]
    race = mining_race(
        weights,
        config.nakamoto.race_blocks,
        config.nakamoto.difficulty_ms,
        substream(config.seed, 'mining', len(weights)),
    )
    outcome = nakamoto_run(
        config.miners,
        config.adversary,
        config.network,
        config.seed,
        blocks=config.nakamoto.blocks,
        difficulty_ms=config.nakamoto.difficulty_ms,
        depth=config.nakamoto.depth,
        scheme=config.scheme,
    )
    rows = [
        {
            'miner': i,
            'hash_power': w,
            'expected': pow_win_prob(weights, i),
            'race_share': race.shares[i],
            'network_share': outcome.shares[i],
            'mined': outcome.mined[i],
        }
        for i, w in enumerate(weights)
    ]
    logger.info('mining-share: %d race blocks, %d mined on the network', sum(race.wins), outcome.total_mined)
    return ScenarioReport(
        scenario='mining-share',
        protocol='nakamoto',
        seed=config.seed,
        summary={
            'race_blocks': config.nakamoto.race_blocks,
            'max_race_deviation': max(abs(r['race_share'] - r['expected']) for r in rows),
            'mean_interval_ms': race.mean_interval_ms,
            'network_blocks': outcome.total_mined,
            'orphans': outcome.orphans,
            'common_prefix': outcome.common_prefix,
            'messages_per_block': outcome.messages_per_block,
            'reorg_depths': list(outcome.reorg_depths),
        },
        rows=rows,
        traces={'nakamoto': outcome.trace},
    )
