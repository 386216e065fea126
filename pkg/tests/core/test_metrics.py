"""Tests for latency, throughput and message-complexity measurements."""

import pytest

from src.core.bft import om_message_count, om_run, pbft_run, vr_run
from src.core.metrics import (
    InvalidDuration,
    MissingPhaseMarker,
    message_complexity,
    measure_latencies,
    throughput,
)
from src.core.microchain import MicrochainParams, microchain_run
from src.core.netsim import SynchronyModel, Trace

SCHEME = 'sim-hash'


def mark(trace: Trace, time: float, node: int, label: str, **data) -> int:
    return trace.add(time=time, kind='mark', sender=node, label=label, data=data).seq


def phase_trace() -> Trace:
    trace = Trace()
    mark(trace, 0.0, 4, 'tx_sent', tx='aa')
    mark(trace, 30.0, 0, 'tx_held', tx='aa', member=True)
    mark(trace, 45.0, 1, 'tx_held', tx='aa', member=True)
    mark(trace, 90.0, 2, 'tx_held', tx='aa', member=False)
    mark(trace, 100.0, 0, 'block_proposed', block='b1', height=1, slot=1)
    mark(trace, 100.0, 0, 'block_verified', block='b1', member=True)
    mark(trace, 160.0, 1, 'block_verified', block='b1', member=True)
    mark(trace, 200.0, 0, 'vote_start', epoch=1, height=1, block='b1')
    mark(trace, 210.0, 1, 'vote_start', epoch=1, height=1, block='b1')
    mark(trace, 260.0, 0, 'finalized', epoch=1, height=1, block='b1', member=True)
    mark(trace, 290.0, 1, 'finalized', epoch=1, height=1, block='b1', member=True)
    return trace


# Latencies


def test_latency_components_from_markers():
    """Test each component against hand-placed phase markers."""
    report = measure_latencies(phase_trace(), k=2, block_size=1024)

    assert report.t_ct == 45.0
    assert report.t_bp == 60.0
    assert report.t_cf == 90.0
    assert report.t_bc == report.t_ct + report.t_bp + report.t_cf
    assert report.events['t_ct'] == (0, 2)
    assert report.events['t_cf'] == (7, 10)


def test_latency_skips_items_not_reached_by_the_whole_committee():
    """Test that a transaction held by fewer than k members is not measured."""
    trace = phase_trace()
    mark(trace, 300.0, 4, 'tx_sent', tx='bb')
    mark(trace, 320.0, 0, 'tx_held', tx='bb', member=True)

    assert measure_latencies(trace, k=2, block_size=0).t_ct == 45.0


def test_latency_reports_missing_phase():
    """Test that a trace without finality markers names the missing phase."""
    trace = Trace()
    mark(trace, 0.0, 2, 'tx_sent', tx='aa')
    mark(trace, 10.0, 0, 'tx_held', tx='aa', member=True)
    mark(trace, 20.0, 0, 'block_proposed', block='b1', height=1, slot=1)
    mark(trace, 20.0, 0, 'block_verified', block='b1', member=True)

    with pytest.raises(MissingPhaseMarker) as exc:
        measure_latencies(trace, k=1, block_size=0)
    assert exc.value.phase == 't_cf'


def test_single_member_committee_holds_after_one_hop():
    """Test that with one validator the transaction latency is the link delay."""
    outcome = microchain_run(
        1,
        params=MicrochainParams(epochs=1, epoch_length=3),
        model=SynchronyModel(min_delay_ms=50.0, delta_ms=50.0),
        seed=2,
        scheme=SCHEME,
    )

    report = measure_latencies(outcome.trace, k=1, block_size=0)

    assert report.t_ct == 50.0
    assert report.t_bp == 0.0
    assert report.t_cf == 0.0


# Throughput


def test_throughput_reference_block():
    """Test 2 MB blocks every 17.78 s."""
    result = throughput(2 * 2**20, 17.78)

    assert 403 <= result.mb_per_hour <= 407
    assert 112 <= result.tx_per_s <= 114


def test_throughput_unit_check():
    """Test that one megabyte per hour is one M/h."""
    assert throughput(2**20, 3600.0).mb_per_hour == pytest.approx(1.0)


@pytest.mark.parametrize('seconds', [0.0, -1.0])
def test_throughput_rejects_non_positive_cycle(seconds):
    """Test the invalid block cycle time."""
    with pytest.raises(InvalidDuration):
        throughput(2**20, seconds)


# Message complexity


def test_om_complexity_counts_and_exponent():
    """Test exact OM(1) counts and a quadratic fitted exponent."""
    traces = {n: om_run(n, 1, seed=1).trace for n in (4, 7, 10, 13)}

    report = message_complexity('om', traces)

    assert report.totals == {n: om_message_count(n, 1) for n in (4, 7, 10, 13)}
    assert report.totals[4] == 9
    assert report.slope == pytest.approx(2.0, abs=0.3)


def test_pbft_complexity_counts_by_phase():
    """Test the 3 + 9 + 12 + 4 split of one PBFT request at N=4."""
    outcome = pbft_run(4, 1, ['op-1'], seed=5, scheme=SCHEME)

    report = message_complexity('pbft', {4: outcome.trace})

    assert report.counts[4] == {
        'PbftPrePrepare': 3,
        'PbftPrepare': 9,
        'PbftCommit': 12,
        'PbftReply': 4,
    }
    assert report.totals[4] == 28
    assert report.slope is None


def test_vr_complexity_three_replicas():
    """Test request, two Prepares, two PrepareOKs and a reply."""
    outcome = vr_run(3, 1, ['op-1'], seed=4, until_ms=2_000.0)

    report = message_complexity('vr', {3: outcome.trace})

    assert report.totals[3] == 6


def test_complexity_per_unit_normalisation():
    """Test that a fixed fan-out per unit fits an exponent of one."""
    traces = {}
    for n in (4, 8, 16):
        trace = Trace()
        trace.sent['BlockGossip'] = 10 * (n - 1)
        traces[n] = trace

    report = message_complexity('nakamoto', traces, units={4: 10, 8: 10, 16: 10})

    assert report.per_unit == {4: 3.0, 8: 7.0, 16: 15.0}
    assert report.slope == pytest.approx(1.0)
    assert report.r_squared == pytest.approx(1.0)
    assert [row['n'] for row in report.rows()] == [4, 8, 16]
