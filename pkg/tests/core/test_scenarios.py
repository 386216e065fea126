"""Tests for the scenario registry and the experiment scenarios."""

import pytest

from src.core.bft import om_message_count
from src.core.run import parse_config, run_scenario
from src.core.scenarios import (
    SCENARIOS,
    DuplicateScenario,
    UnknownScenario,
    get_scenario,
    list_scenarios,
    scenario,
)

KB = 2**10
MB = 2**20


def config_for(name: str, **raw):
    return parse_config({'seed': 1, 'scheme': 'sim-hash', 'scenario': name, **raw})


# Registry


def test_every_experiment_is_registered():
    """Test that the single-run and sweep scenarios are all present."""
    names = {s.name for s in list_scenarios()}

    assert names >= {
        'microchain',
        'byzantine-safety',
        'committee-size',
        'block-size',
        'pbft',
        'vr',
        'om',
        'message-complexity',
        'attacker-overtake',
        'selfish-mining',
        'mining-share',
    }
    assert [s.name for s in list_scenarios()] == sorted(names)


def test_unknown_scenario_lists_available_names():
    """Test that a typo names the registered scenarios."""
    with pytest.raises(UnknownScenario) as exc_info:
        get_scenario('comittee-size')

    assert 'committee-size' in exc_info.value.available
    assert 'comittee-size' in str(exc_info.value)


def test_duplicate_registration_is_rejected():
    """Test that a name can be registered only once."""
    with pytest.raises(DuplicateScenario):
        scenario('pbft', 'pbft', 'again')(lambda config, workers=1: None)

    assert SCENARIOS['pbft'].description != 'again'


# Microchain


def test_byzantine_safety_majority_equivocators_produce_evidence():
    """Test that equivocators with 3/4 of credit finalize conflicting checkpoints."""
    config = config_for(
        'byzantine-safety',
        seed=3,
        nodes=[{}, {'equivocating': True}, {'equivocating': True}, {'equivocating': True}],
        microchain={'epochs': 1},
    )

    report = run_scenario(config)

    assert report.safety_violation
    assert report.summary['conflicts'] == 1
    assert report.summary['equivocating_credit_share'] == 0.75
    assert report.evidence['seed'] == 3


def test_byzantine_safety_minority_equivocator_stays_safe():
    """Test that one equivocator in four is slashed without breaking safety."""
    config = config_for(
        'byzantine-safety',
        seed=3,
        runs=2,
        nodes=[{}, {}, {}, {'equivocating': True}],
        microchain={'epochs': 2},
    )

    report = run_scenario(config)

    assert not report.safety_violation
    assert report.summary['safe_runs'] == 2
    assert report.summary['slashed_runs'] == 2
    assert len(report.rows) == 2


def test_committee_size_latencies_grow_with_k():
    """Test that t_ct grows about linearly and t_cf faster than linearly in K."""
    config = config_for('committee-size', microchain={'epoch_length': 4})

    report = run_scenario(config)

    assert [row['k'] for row in report.rows] == [4, 8, 12, 16]
    assert report.summary['t_cf_monotone']
    assert 0.5 < report.summary['t_ct_slope'] < 1.5
    assert report.summary['t_cf_slope'] > 1.5
    assert set(report.traces) == {'committee-4', 'committee-8', 'committee-12', 'committee-16'}


def test_block_size_throughput_rises_then_falls():
    """Test that throughput peaks at an interior block size under a capacity cap."""
    config = config_for('block-size', microchain={'epoch_length': 4})

    report = run_scenario(config)

    sizes = [row['block_size'] for row in report.rows]
    assert sizes == [512 * KB, 1 * MB, 2 * MB, 4 * MB]
    assert report.summary['rises_then_falls']
    assert report.summary['peak_block_size'] in sizes[1:-1]
    cycle = [row['t_bc_ms'] for row in report.rows]
    assert cycle == sorted(cycle)


# Classical baselines


def test_om_scenario_reports_agreement():
    """Test OM(1) with four generals."""
    report = run_scenario(config_for('om', protocol='om'))

    assert report.summary['agreement_possible']
    assert report.summary['agreed']
    assert report.summary['messages'] == om_message_count(4, 1)
    assert not report.safety_violation


def test_om_below_bound_finds_witness():
    """Test that three generals with one traitor yield a disagreement witness."""
    report = run_scenario(config_for('om', protocol='om', nodes=[{}, {}, {}]))

    assert not report.summary['agreement_possible']
    assert report.summary['witness'] is not None


def test_pbft_scenario_executes_every_op():
    """Test a clean PBFT run with four replicas."""
    config = config_for('pbft', protocol='pbft', bft={'ops': ['op-1', 'op-2']})

    report = run_scenario(config)

    assert not report.safety_violation
    assert report.summary['agreeing_runs'] == 1
    assert report.summary['completed_runs'] == 1
    assert report.summary['view_changes'] == 0


def test_vr_scenario_survives_backup_crash():
    """Test VR with three replicas and one crashed backup."""
    config = config_for(
        'vr',
        protocol='vr',
        nodes=[{}, {}, {}],
        adversary={'behaviors': {'2': {'kind': 'crash', 'at_ms': 0.0}}},
    )

    report = run_scenario(config)

    assert not report.safety_violation
    assert report.summary['consistent_runs'] == 1
    assert report.summary['completed_runs'] == 1


def test_message_complexity_exponents():
    """Test fitted exponents: OM(1) ~ 2, OM(2) ~ 3, PBFT ~ 2, VR ~ 1, Nakamoto = 1."""
    config = config_for('message-complexity', nakamoto={'blocks': 20})

    report = run_scenario(config)

    slopes = report.summary['slopes']
    assert slopes['om-f1'] == pytest.approx(2.0, abs=0.3)
    assert slopes['om-f2'] == pytest.approx(3.0, abs=0.4)
    assert slopes['pbft'] == pytest.approx(2.0, abs=0.4)
    assert slopes['vr'] == pytest.approx(1.0, abs=0.3)
    assert slopes['nakamoto'] == pytest.approx(1.0, abs=0.1)
    assert report.summary['totals']['om-f1'] == {
        n: om_message_count(n, 1) for n in (4, 7, 10, 13)
    }


# Nakamoto


def test_attacker_overtake_matches_closed_form():
    """Test Monte-Carlo overtake rates against (p/(1-p))^m."""
    config = config_for(
        'attacker-overtake',
        protocol='nakamoto',
        nakamoto={'trials': 50_000},
        sweep={'probabilities': [0.1, 0.3, 0.5], 'depths': [1, 2]},
    )

    report = run_scenario(config)

    assert len(report.rows) == 6
    assert report.summary['within_tolerance']
    assert all(rate > 0.99 for rate in report.summary['half_share_rates'].values())


def test_selfish_mining_profitable_above_a_third():
    """Test that withholding pays once the attacker's share passes 1/3 at gamma 0."""
    config = config_for(
        'selfish-mining',
        protocol='nakamoto',
        nakamoto={'revenue_blocks': 100_000},
        sweep={'alphas': [0.1, 0.25, 0.4, 0.45]},
    )

    report = run_scenario(config)

    gains = {row['alpha']: row['gain'] for row in report.rows}
    assert gains[0.1] < 0
    assert gains[0.25] < 0
    assert gains[0.4] > 0
    assert report.summary['profitable_from'] == 0.4
    assert 'network' not in report.summary


def test_mining_share_tracks_hash_power():
    """Test race shares against w_i / sum(w) and a common prefix on the network."""
    config = config_for(
        'mining-share',
        protocol='nakamoto',
        nodes=[{'hash_power': 1.0}, {'hash_power': 2.0}, {'hash_power': 3.0}, {'hash_power': 4.0}],
        nakamoto={'race_blocks': 50_000, 'blocks': 30},
    )

    report = run_scenario(config)

    assert [row['expected'] for row in report.rows] == pytest.approx([0.1, 0.2, 0.3, 0.4])
    assert report.summary['max_race_deviation'] < 0.01
    assert report.summary['common_prefix']
    assert 'nakamoto' in report.traces


@pytest.mark.slow
def test_attacker_overtake_at_full_size():
    """Test the default grid at 100k trials per cell."""
    report = run_scenario(config_for('attacker-overtake', protocol='nakamoto'))

    assert len(report.rows) == 12
    assert report.summary['within_tolerance']
