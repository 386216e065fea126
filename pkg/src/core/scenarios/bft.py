"""Classical baseline scenarios and the message-complexity sweep."""

import logging
from collections.abc import Callable
from typing import TYPE_CHECKING, Any

from src.core.bft import (
    PbftOutcome,
    VrOutcome,
    om_run,
    om_search,
    parse_order,
    pbft_run,
    prefix_consistent,
    vr_run,
)
from src.core.metrics import ComplexityReport, message_complexity
from src.core.nakamoto import nakamoto_run
from src.core.netsim import Trace
from src.core.scenarios.pool import parallel_map
from src.core.scenarios.registry import scenario
from src.core.scenarios.report import ScenarioReport

if TYPE_CHECKING:
    from src.core.run.config import SimConfig

logger = logging.getLogger(__name__)

EXPECTED_EXPONENTS = {'pbft': 2.0, 'vr': 1.0, 'nakamoto': 1.0}


def run_pbft(config: 'SimConfig') -> PbftOutcome:
    return pbft_run(
        len(config.nodes),
        config.bft.f,
        config.bft.ops,
        config.adversary,
        config.network,
        config.seed,
        until_ms=config.bft.until_ms,
        timeout_ms=config.bft.timeout_ms,
        checkpoint_interval=config.bft.checkpoint_interval,
        reply_quorum=config.bft.reply_quorum,
        scheme=config.scheme,
    )


def run_vr(config: 'SimConfig') -> VrOutcome:
    return vr_run(
        len(config.nodes),
        config.bft.f,
        config.bft.ops,
        config.adversary,
        config.network,
        config.seed,
        until_ms=config.bft.until_ms,
        timeout_ms=config.bft.timeout_ms,
    )


def _seeded(
    config: 'SimConfig', fn: Callable[['SimConfig'], Any], workers: int
) -> tuple[list[int], list[Any]]:
    seeds = [config.seed + i for i in range(config.runs)]
    return seeds, parallel_map(fn, [config.with_seed(s) for s in seeds], workers)


@scenario('pbft', 'pbft', 'PBFT replicas and one client under the configured adversary')
def pbft_scenario(config: 'SimConfig', workers: int = 1) -> ScenarioReport:
    seeds, outcomes = _seeded(config, run_pbft, workers)
    first: PbftOutcome = outcomes[0]
    rows = [
        {
            'seed': seed,
            'honest_agree': o.honest_agree,
            'executed': max((len(log) for log in o.executed.values()), default=0),
            'results': len(o.results),
            'max_view': max(o.views.values()),
            **o.phase_messages,
        }
        for seed, o in zip(seeds, outcomes, strict=True)
    ]
    broken = next(
        ((s, o) for s, o in zip(seeds, outcomes, strict=True) if not o.honest_agree), None
    )
    traces = {f'pbft-{seeds[0]}': first.trace}
    evidence = None
    if broken is not None:
        seed, outcome = broken
        traces[f'pbft-{seed}'] = outcome.trace
        evidence = {
            'seed': seed,
            'reason': 'honest replicas executed different logs',
            'executed': {node: list(log) for node, log in outcome.executed.items()},
        }
    return ScenarioReport(
        scenario='pbft',
        protocol='pbft',
        seed=config.seed,
        summary={
            'n': first.n,
            'f': first.f,
            'runs': len(outcomes),
            'agreeing_runs': sum(o.honest_agree for o in outcomes),
            'completed_runs': sum(len(o.results) == len(config.bft.ops) for o in outcomes),
            'view_changes': sum(max(o.views.values()) > 0 for o in outcomes),
            'phase_messages': first.phase_messages,
            'normal_messages': sum(first.phase_messages.values()),
            'results': list(first.results),
        },
        rows=rows,
        traces=traces,
        evidence=evidence,
    )


@scenario('vr', 'vr', 'Viewstamped Replication with crashes, view change and recovery')
def vr_scenario(config: 'SimConfig', workers: int = 1) -> ScenarioReport:
    seeds, outcomes = _seeded(config, run_vr, workers)
    first: VrOutcome = outcomes[0]
    rows = [
        {
            'seed': seed,
            'prefix_consistent': prefix_consistent(o.executed.values()),
            'results': len(o.results),
            'max_view': max(o.views.values()),
            'normal_messages': o.normal_messages,
        }
        for seed, o in zip(seeds, outcomes, strict=True)
    ]
    broken = next(
        (
            (s, o)
            for s, o in zip(seeds, outcomes, strict=True)
            if not prefix_consistent(o.executed.values())
        ),
        None,
    )
    traces = {f'vr-{seeds[0]}': first.trace}
    evidence = None
    if broken is not None:
        seed, outcome = broken
        traces[f'vr-{seed}'] = outcome.trace
        evidence = {
            'seed': seed,
            'reason': 'executed logs are not prefix-ordered',
            'executed': {node: list(log) for node, log in outcome.executed.items()},
        }
    return ScenarioReport(
        scenario='vr',
        protocol='vr',
        seed=config.seed,
        summary={
            'n': first.n,
            'f': first.f,
            'runs': len(outcomes),
            'consistent_runs': sum(r['prefix_consistent'] for r in rows),
            'completed_runs': sum(len(o.results) == len(config.bft.ops) for o in outcomes),
            'normal_messages': first.normal_messages,
            'views': first.views,
            'results': list(first.results),
        },
        rows=rows,
        traces=traces,
        evidence=evidence,
    )


@scenario('om', 'om', 'Oral Messages among N generals; below N = 3f + 1 searches for a disagreement')
def om_scenario(config: 'SimConfig', workers: int = 1) -> ScenarioReport:  # noqa: ARG001
    n, f = len(config.nodes), config.bft.f
    outcome = om_run(
        n, f, parse_order(config.bft.commander_value), config.adversary, config.network, config.seed
    )
    summary: dict[str, Any] = {
        'n': n,
        'f': f,
        'depth': outcome.depth,
        'agreement_possible': outcome.agreement_possible,
        'commander_loyal': outcome.commander_loyal,
        'decisions': outcome.decisions,
        'agreed': outcome.agreed,
        'valid': outcome.valid,
        'messages': outcome.messages,
        'expected_messages': outcome.expected_messages,
    }
    if not outcome.agreement_possible:
        witness = om_search(n, f, seed=config.seed)
        summary['witness'] = witness.model_dump() if witness else None
    evidence = None
    if outcome.agreement_possible and not (outcome.agreed and outcome.valid):
        evidence = {'reason': 'loyal lieutenants disagree', 'decisions': outcome.decisions}
    return ScenarioReport(
        scenario='om',
        protocol='om',
        seed=config.seed,
        summary=summary,
        traces={'om': outcome.trace} if outcome.trace is not None else {},
        evidence=evidence,
    )


# Message complexity


def complexity_point(job: tuple['SimConfig', str, int, int]) -> tuple[Trace, float]:
    """Trace of one normal run at size n, and the unit its count is divided by."""
    config, protocol, n, f = job
    model = config.network
    match protocol:
        case 'om':
            return om_run(n, f, model=model, seed=config.seed).trace, 1.0
        case 'pbft':
            timeout = config.bft.timeout_ms or 20 * model.mean_delay_ms
            outcome = pbft_run(
                n, f, ['op-1'], model=model, seed=config.seed, timeout_ms=timeout, scheme=config.scheme
            )
            return outcome.trace, 1.0
        case 'vr':
            return vr_run(n, f, ['op-1'], model=model, seed=config.seed, until_ms=2_000.0).trace, 1.0
        case _:
            outcome = nakamoto_run(
                n,
                model=model,
                seed=config.seed,
                blocks=config.nakamoto.blocks,
                difficulty_ms=config.nakamoto.difficulty_ms,
                scheme=config.scheme,
            )
            return outcome.trace, float(max(1, outcome.total_mined))


def _complexity_jobs(config: 'SimConfig') -> list[tuple[str, str, int, int]]:
    """(label, protocol, n, f) for every point of the sweep."""
    jobs = []
    for protocol, sizes in sorted(config.sweep.complexity_sizes.items()):
        if protocol == 'om':
            for f in config.sweep.om_faults:
                jobs += [(f'om-f{f}', 'om', n + 3 * (f - 1), f) for n in sizes]
        elif protocol == 'pbft':
            jobs += [('pbft', 'pbft', n, (n - 1) // 3) for n in sizes]
        elif protocol == 'vr':
            jobs += [('vr', 'vr', n, (n - 1) // 2) for n in sizes]
        else:
            jobs += [('nakamoto', 'nakamoto', n, 0) for n in sizes]
    return jobs


@scenario(
    'message-complexity',
    'all',
    'Exact per-phase message counts and fitted growth exponents of OM, PBFT, VR and Nakamoto gossip',
)
def message_complexity_scenario(config: 'SimConfig', workers: int = 1) -> ScenarioReport:
    jobs = _complexity_jobs(config)
    points = parallel_map(
        complexity_point, [(config, protocol, n, f) for _, protocol, n, f in jobs], workers
    )
    grouped: dict[str, tuple[str, dict[int, Trace], dict[int, float]]] = {}
    for (label, protocol, n, _), (trace, unit) in zip(jobs, points, strict=True):
        _, traces, units = grouped.setdefault(label, (protocol, {}, {}))
        traces[n], units[n] = trace, unit

    reports: dict[str, ComplexityReport] = {
        label: message_complexity(protocol, traces, units=units)
        for label, (protocol, traces, units) in grouped.items()
    }
    expected = {
        label: float(int(label.removeprefix('om-f')) + 1)
        if label.startswith('om-f')
        else EXPECTED_EXPONENTS[label]
        for label in reports
    }
    rows = [{'series': label, **row} for label, report in reports.items() for row in report.rows()]
    for label, report in reports.items():
        logger.info('%s: fitted exponent %s (expected %.1f)', label, report.slope, expected[label])
    return ScenarioReport(
        scenario='message-complexity',
        protocol='all',
        seed=config.seed,
        summary={
            'slopes': {label: report.slope for label, report in reports.items()},
            'expected': expected,
            'totals': {label: report.totals for label, report in reports.items()},
        },
        rows=rows,
        traces={
            f'{label}-{n}': trace
            for label, (_, traces, _) in grouped.items()
            for n, trace in traces.items()
        },
    )
