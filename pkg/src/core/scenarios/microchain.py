"""Microchain scenarios: single runs, the safety batch and the two latency sweeps."""

import logging
from typing import TYPE_CHECKING, Any

from src.core.metrics import (
    LatencyReport,
    MissingPhaseMarker,
    growth_exponent,
    measure_latencies,
    throughput,
)
from src.core.microchain import MicrochainOutcome, MicrochainParams, microchain_run
from src.core.netsim import SynchronyModel, Trace
from src.core.scenarios.pool import parallel_map
from src.core.scenarios.registry import scenario
from src.core.scenarios.report import ScenarioReport

if TYPE_CHECKING:
    from src.core.run.config import SimConfig

logger = logging.getLogger(__name__)


def run_config(config: 'SimConfig') -> MicrochainOutcome:
    """One Microchain run exactly as the configuration describes it."""
    return microchain_run(
        config.credits,
        equivocating=config.equivocating,
        key_seeds=config.key_seeds,
        params=config.microchain,
        model=config.network,
        adversary=config.adversary,
        seed=config.seed,
        scheme=config.scheme,
    )


def _latencies(outcome: MicrochainOutcome, k: int) -> LatencyReport | None:
    try:
        return measure_latencies(outcome.trace, k, outcome.params.block_bytes)
    except MissingPhaseMarker as exc:
        logger.warning('no latency report: %s', exc)
        return None


def _committee_size(outcome: MicrochainOutcome) -> int:
    return outcome.params.committee_size or outcome.n


def _evidence(outcome: MicrochainOutcome, seed: int) -> dict[str, Any]:
    return {'seed': seed, 'halt': outcome.halted, **(outcome.evidence or {})}


def _run_row(outcome: MicrochainOutcome, seed: int) -> dict[str, Any]:
    return {
        'seed': seed,
        'safe': outcome.safe,
        'halted': outcome.halted,
        'finalized_epochs': outcome.finalized_epochs,
        'agreed': outcome.agreed,
        'randshare_agreed': outcome.randshare_agreed,
        'equivocations': len(outcome.trace.marks('equivocation')),
        'messages': outcome.trace.total_sent,
    }


@scenario('microchain', 'microchain', 'Microchain validators finalizing epochs under the configured network')
def microchain_scenario(config: 'SimConfig', workers: int = 1) -> ScenarioReport:
    seeds = [config.seed + i for i in range(config.runs)]
    outcomes = parallel_map(run_config, [config.with_seed(s) for s in seeds], workers)
    first = outcomes[0]
    latency = _latencies(first, _committee_size(first))
    violating = next(
        ((s, o) for s, o in zip(seeds, outcomes, strict=True) if not o.safe), None
    )
    traces = {f'microchain-{seeds[0]}': first.trace}
    if violating is not None:
        traces[f'microchain-{violating[0]}'] = violating[1].trace
    return ScenarioReport(
        scenario='microchain',
        protocol='microchain',
        seed=config.seed,
        summary={
            'validators': first.n,
            'finalized_epochs': first.finalized_epochs,
            'finalized_heights': [c.height for c in first.finalized[first.honest[0]]],
            'agreed': first.agreed,
            'randshare_agreed': first.randshare_agreed,
            'halted': first.halted,
            'credits': first.credits,
            'dynasties': [list(d) for d in first.dynasties],
            'proposers': first.proposers,
            'poc_evaluations': first.poc_evaluations,
            'member_slots': first.member_slots,
            'latency': latency.model_dump() if latency else None,
            'messages': dict(sorted(first.trace.sent.items())),
            'runs': len(outcomes),
            'safe_runs': sum(o.safe for o in outcomes),
        },
        rows=[_run_row(o, s) for s, o in zip(seeds, outcomes, strict=True)],
        traces=traces,
        chain=first.chain,
        evidence=_evidence(violating[1], violating[0]) if violating else None,
    )


@scenario(
    'byzantine-safety',
    'microchain',
    'Seeded batch with the configured equivocating validators; counts conflicting finalizations',
)
def byzantine_safety_scenario(config: 'SimConfig', workers: int = 1) -> ScenarioReport:
    seeds = [config.seed + i for i in range(config.runs)]
    outcomes = parallel_map(run_config, [config.with_seed(s) for s in seeds], workers)
    total = sum(config.credits)
    equivocating_credit = sum(config.credits[i] for i in config.equivocating)
    conflicts = [(s, o) for s, o in zip(seeds, outcomes, strict=True) if not o.safe]
    shown_seed, shown = conflicts[0] if conflicts else (seeds[0], outcomes[0])
    logger.info('byzantine-safety: %d of %d runs conflicted', len(conflicts), len(outcomes))
    return ScenarioReport(
        scenario='byzantine-safety',
        protocol='microchain',
        seed=config.seed,
        summary={
            'runs': len(outcomes),
            'equivocating': sorted(config.equivocating),
            'equivocating_credit_share': equivocating_credit / total,
            'conflicts': len(conflicts),
            'safe_runs': len(outcomes) - len(conflicts),
            'slashed_runs': sum(
                all(o.credits[i] == 0 for i in config.equivocating) for o in outcomes
            )
            if config.equivocating
            else 0,
        },
        rows=[_run_row(o, s) for s, o in zip(seeds, outcomes, strict=True)],
        traces={f'microchain-{shown_seed}': shown.trace},
        evidence=_evidence(conflicts[0][1], conflicts[0][0]) if conflicts else None,
    )


# Latency sweeps


def _latency_row(report: LatencyReport) -> dict[str, Any]:
    th = throughput(report.block_size, report.t_bc / 1000) if report.t_bc > 0 else None
    return {
        'k': report.k,
        'block_size': report.block_size,
        't_ct_ms': report.t_ct,
        't_bp_ms': report.t_bp,
        't_cf_ms': report.t_cf,
        't_bc_ms': report.t_bc,
        'mb_per_hour': th.mb_per_hour if th else None,
        'tx_per_s': th.tx_per_s if th else None,
    }


def committee_point(job: tuple['SimConfig', int]) -> tuple[dict[str, Any], Trace]:
    """
    One committee of k unit-credit validators on a shared broadcast medium.

    Every transmission holds the channel for the configured airtime, so a
    round of all-to-all votes costs k(k-1) airtimes; the slot is stretched
    to fit that round.
    """
    config, k = job
    sweep = config.sweep
    model = SynchronyModel(
        min_delay_ms=sweep.link_delay_ms,
        delta_ms=sweep.link_delay_ms,
        shared_medium=True,
        airtime_ms=sweep.airtime_ms,
    )
    slot_ms = max(config.microchain.slot_ms, 4 * k * k * sweep.airtime_ms)
    params = config.microchain.model_copy(
        update={'slot_ms': slot_ms, 'epochs': 1, 'committee_size': None}
    )
    outcome = microchain_run(k, params=params, model=model, seed=config.seed, scheme=config.scheme)
    report = measure_latencies(outcome.trace, k, params.block_bytes)
    return _latency_row(report), outcome.trace


def _is_monotone(values: list[float]) -> bool:
    return all(a < b for a, b in zip(values, values[1:], strict=False))


@scenario(
    'committee-size',
    'microchain',
    'Latency components against committee size K on a shared medium (t_ct ~ K, t_cf ~ K^2)',
)
def committee_size_scenario(config: 'SimConfig', workers: int = 1) -> ScenarioReport:
    sizes = sorted(config.sweep.committee_sizes)
    points = parallel_map(committee_point, [(config, k) for k in sizes], workers)
    rows = [row for row, _ in points]
    t_ct_slope, _ = growth_exponent(sizes, [r['t_ct_ms'] for r in rows])
    t_cf_slope, _ = growth_exponent(sizes, [r['t_cf_ms'] for r in rows])
    return ScenarioReport(
        scenario='committee-size',
        protocol='microchain',
        seed=config.seed,
        summary={
            'committee_sizes': sizes,
            'airtime_ms': config.sweep.airtime_ms,
            'link_delay_ms': config.sweep.link_delay_ms,
            't_ct_slope': t_ct_slope,
            't_cf_slope': t_cf_slope,
            't_cf_monotone': _is_monotone([r['t_cf_ms'] for r in rows]),
        },
        rows=rows,
        traces={f'committee-{k}': trace for k, (_, trace) in zip(sizes, points, strict=True)},
    )


def block_point(job: tuple['SimConfig', int]) -> tuple[dict[str, Any], Trace]:
    """One run with blocks padded to `size` bytes over capacity-limited links."""
    config, size = job
    sweep = config.sweep
    model = config.network.model_copy(
        update={
            'bandwidth_bytes_per_ms': sweep.bandwidth_bytes_per_ms,
            'congestion_window_bytes': sweep.congestion_window_bytes,
            'shared_medium': False,
        }
    )
    slot_ms = max(config.microchain.slot_ms, 2 * (model.transfer_ms(size) + model.delta_ms))
    params: MicrochainParams = config.microchain.model_copy(
        update={'slot_ms': slot_ms, 'epochs': 1, 'block_bytes': size}
    )
    outcome = microchain_run(
        config.credits,
        key_seeds=config.key_seeds,
        params=params,
        model=model,
        seed=config.seed,
        scheme=config.scheme,
    )
    report = measure_latencies(outcome.trace, _committee_size(outcome), size)
    return _latency_row(report), outcome.trace


def _rises_then_falls(values: list[float]) -> bool:
    peak = values.index(max(values))
    return 0 < peak < len(values) - 1 and _is_monotone(values[: peak + 1]) and _is_monotone(
        [-v for v in values[peak:]]
    )


@scenario(
    'block-size',
    'microchain',
    'Block cycle time and throughput against block size under a link-capacity cap',
)
def block_size_scenario(config: 'SimConfig', workers: int = 1) -> ScenarioReport:
    sizes = sorted(config.sweep.block_sizes)
    points = parallel_map(block_point, [(config, size) for size in sizes], workers)
    rows = [row for row, _ in points]
    series = [r['mb_per_hour'] or 0.0 for r in rows]
    return ScenarioReport(
        scenario='block-size',
        protocol='microchain',
        seed=config.seed,
        summary={
            'block_sizes': sizes,
            'bandwidth_bytes_per_ms': config.sweep.bandwidth_bytes_per_ms,
            'congestion_window_bytes': config.sweep.congestion_window_bytes,
            'mb_per_hour': series,
            'peak_block_size': sizes[series.index(max(series))],
            'rises_then_falls': _rises_then_falls(series),
        },
        rows=rows,
        traces={f'block-{size}': trace for size, (_, trace) in zip(sizes, points, strict=True)},
    )
