"""Tests for mining probabilities, the Monte-Carlo oracles and the networked miners."""

import numpy as np
import pytest

from src.core.crypto import keygen
from src.core.ledger import ForkTree, build_block, genesis_block
from src.core.nakamoto import (
    BlockGossip,
    InvalidRaceParameters,
    InvalidWeights,
    MinerConfig,
    MinerPolicy,
    MinerState,
    MiningSchedule,
    attacker_overtake_prob,
    common_prefix_holds,
    honest_miner_step,
    mining_race,
    nakamoto_run,
    overtake_trials,
    pow_win_prob,
    schedule_next_block,
    selfish_miner_step,
    selfish_revenue,
)
from src.core.netsim import Deliver, Envelope, Fire, Mark, Send, SetTimer, Start, SynchronyModel

SCHEME = 'sim-hash'


def make_state(policy: MinerPolicy = MinerPolicy.HONEST, hash_power: float = 1.0) -> MinerState:
    keys = keygen('miner-under-test', SCHEME)
    tree = ForkTree(scheme=SCHEME)
    return MinerState(
        node_id=0,
        config=MinerConfig(pk=keys.public, hash_power=hash_power, policy=policy),
        keys=keys,
        schedule=MiningSchedule(difficulty_ms=1000.0, weights=(1.0, 1.0)),
        rng=np.random.default_rng(0),
        tree=tree,
        mining_tip=tree.genesis,
    )


def foreign_chain(length: int, name: str = 'other-miner') -> list:
    keys = keygen(name, SCHEME)
    blocks, parent = [], genesis_block()
    for height in range(1, length + 1):
        parent = build_block(keys, parent, slot=height * 10, dynasty_id=0, credit=0)
        blocks.append(parent)
    return blocks


def gossip(block, at: float = 0.0) -> Deliver:
    envelope = Envelope(
        msg_id=1, sender=1, recipient=0, payload=BlockGossip(block=block), sent_at=at, deliver_at=at
    )
    return Deliver(at=at, envelope=envelope)


def marks(effects: list, label: str) -> list[Mark]:
    return [e for e in effects if isinstance(e, Mark) and e.label == label]


# Analytic


@pytest.mark.parametrize(
    ('weights', 'i', 'expected'),
    [([1, 1, 1, 1], 2, 0.25), ([3, 1], 0, 0.75), ([5], 0, 1.0), ([0, 2], 0, 0.0)],
)
def test_pow_win_prob(weights, i, expected):
    """Test the proportional winning probability."""
    assert pow_win_prob(weights, i) == pytest.approx(expected)


@pytest.mark.parametrize('weights', [[0, 0], [], [1, -1]])
def test_pow_win_prob_invalid(weights):
    """Test that empty, zero-sum or negative weights are rejected."""
    with pytest.raises(InvalidWeights):
        pow_win_prob(weights, 0)


@pytest.mark.parametrize(
    ('p', 'm', 'expected'),
    [(0.5, 6, 1.0), (0.2, 0, 1.0), (1.0, 3, 1.0), (0.3, 6, 729 / 117649), (0.1, 1, 1 / 9)],
)
def test_attacker_overtake_prob(p, m, expected):
    """Test the closed-form catch-up probability and its clamps."""
    assert attacker_overtake_prob(p, m) == pytest.approx(expected)


def test_attacker_overtake_reference_value():
    """Test the reference depth-6 value for a 30% attacker."""
    assert attacker_overtake_prob(0.3, 6) == pytest.approx(6.20e-3, rel=1e-2)


@pytest.mark.parametrize(('p', 'm'), [(-0.1, 1), (1.5, 1), (0.2, -1)])
def test_attacker_overtake_prob_out_of_range(p, m):
    """Test that out-of-range arguments are rejected."""
    with pytest.raises(InvalidRaceParameters):
        attacker_overtake_prob(p, m)


def test_mining_schedule_rejects_zero_total():
    """Test that a schedule with no hash power at all is refused."""
    with pytest.raises(InvalidWeights):
        MiningSchedule(difficulty_ms=1000.0, weights=(0.0, 0.0))


def test_schedule_next_block_zero_power_never_schedules():
    """Test that a miner without hash power gets no mining time."""
    schedule = MiningSchedule(difficulty_ms=1000.0, weights=(0.0, 1.0))
    miner = MinerConfig(hash_power=0.0)

    assert schedule_next_block(miner, 5.0, schedule, np.random.default_rng(1)) is None


def test_schedule_next_block_mean_interval():
    """Test that a quarter-share miner waits four intervals on average."""
    schedule = MiningSchedule(difficulty_ms=1000.0, weights=(1.0, 3.0))
    miner = MinerConfig(hash_power=1.0)
    rng = np.random.default_rng(7)

    draws = [schedule_next_block(miner, 0.0, schedule, rng) for _ in range(50_000)]

    assert np.mean(draws) == pytest.approx(4000.0, rel=0.02)


# Monte-Carlo


def test_mining_race_equal_miners():
    """Test that two equal miners split 10^5 blocks evenly at the target interval."""
    result = mining_race([1.0, 1.0], 100_000, 1000.0, np.random.default_rng(11))

    assert result.shares[0] == pytest.approx(0.5, abs=0.01)
    assert result.mean_interval_ms == pytest.approx(1000.0, rel=0.02)


def test_mining_race_weighted_shares():
    """Test that race winners follow the hash-power proportions."""
    result = mining_race([3.0, 1.0, 0.0], 100_000, 500.0, np.random.default_rng(12))

    assert result.shares[0] == pytest.approx(0.75, abs=0.01)
    assert result.wins[2] == 0


@pytest.mark.parametrize('p', [0.1, 0.2, 0.3])
@pytest.mark.parametrize('m', [1, 2, 3])
def test_overtake_trials_match_closed_form(p, m):
    """Test the empirical catch-up rate against the closed form within 20%."""
    result = overtake_trials(p, m, 100_000, np.random.default_rng(100 + m))
    expected = attacker_overtake_prob(p, m)

    assert result.rate == pytest.approx(expected, rel=0.2)


def test_overtake_trials_depth_six_bounded():
    """Test that the depth-6 success rate stays below the closed form plus 3 sigma."""
    result = overtake_trials(0.3, 6, 100_000, np.random.default_rng(6))
    expected = attacker_overtake_prob(0.3, 6)
    sigma = (expected * (1 - expected) / result.trials) ** 0.5

    assert result.rate <= expected + 3 * sigma
    assert result.unresolved == 0


def test_overtake_trials_half_share_nearly_always_catches_up():
    """Test that an attacker with half the power catches up in more than 99% of trials."""
    result = overtake_trials(0.5, 3, 10_000, np.random.default_rng(5))

    assert result.rate > 0.99


def test_overtake_trials_zero_depth_always_succeeds():
    """Test that an attacker starting level has already caught up."""
    result = overtake_trials(0.1, 0, 1000, np.random.default_rng(0))

    assert result.rate == 1.0


def test_selfish_revenue_exceeds_hash_share():
    """Test that a 40% selfish miner earns more than 40% of the main chain."""
    result = selfish_revenue(0.4, 100_000, np.random.default_rng(4))

    assert result.share > 0.4
    assert result.orphaned > 0


def test_selfish_revenue_small_miner_loses():
    """Test that withholding does not pay for a 10% miner without tie wins."""
    result = selfish_revenue(0.1, 100_000, np.random.default_rng(5))

    assert result.share < 0.1


# Honest miner


def test_honest_miner_start_arms_mining_timer():
    """Test that a miner with hash power arms its mining clock on start."""
    _, effects = honest_miner_step(make_state(), Start())

    assert [e.name for e in effects if isinstance(e, SetTimer)] == ['mine']


def test_honest_miner_without_power_stays_idle():
    """Test that a zero-power miner never arms its clock."""
    _, effects = honest_miner_step(make_state(hash_power=0.0), Start())

    assert effects == []


def test_honest_miner_found_block_is_gossiped():
    """Test that a found block extends the local head and is broadcast."""
    state, effects = honest_miner_step(make_state(), Fire(at=50.0, name='mine'))

    sends = [e for e in effects if isinstance(e, Send)]
    assert len(sends) == 1 and sends[0].to is None
    assert sends[0].payload.block.height == 1
    assert state.tree.head_block().hash == sends[0].payload.block.hash
    assert state.mining_tip == sends[0].payload.block.hash


def test_honest_miner_retargets_to_longer_branch():
    """Test that a longer foreign branch becomes the mining target."""
    state = make_state()
    for block in foreign_chain(2):
        state, _ = honest_miner_step(state, gossip(block))

    assert state.tree.head_block().height == 2
    assert state.mining_tip == state.tree.longest_chain_head()


def test_honest_miner_keeps_head_on_stale_branch():
    """Test that a shorter foreign branch is stored without moving the head."""
    state = make_state()
    state, _ = honest_miner_step(state, Fire(at=10.0, name='mine'))
    state, _ = honest_miner_step(state, Fire(at=20.0, name='mine'))
    tip = state.mining_tip
    stale = foreign_chain(1)[0]

    state, effects = honest_miner_step(state, gossip(stale))

    assert stale.hash in state.tree
    assert state.mining_tip == tip
    assert effects == []


def test_honest_miner_records_reorg_depth():
    """Test that abandoning a local block is marked as a depth-1 reorg."""
    state = make_state()
    state, _ = honest_miner_step(state, Fire(at=10.0, name='mine'))
    reorgs = []
    for block in foreign_chain(2):
        state, effects = honest_miner_step(state, gossip(block))
        reorgs.extend(marks(effects, 'reorg'))

    assert [m.data['depth'] for m in reorgs] == [1]


# Selfish miner


def test_selfish_miner_withholds_found_blocks():
    """Test that mined blocks stay private."""
    state = make_state(MinerPolicy.SELFISH)
    state, effects = selfish_miner_step(state, Fire(at=10.0, name='mine'))

    assert not [e for e in effects if isinstance(e, Send)]
    assert len(state.private) == 1


def test_selfish_miner_releases_when_public_closes_in():
    """Test that a lead of 2 cut to 1 releases the whole private branch."""
    state = make_state(MinerPolicy.SELFISH)
    state, _ = selfish_miner_step(state, Fire(at=10.0, name='mine'))
    state, _ = selfish_miner_step(state, Fire(at=20.0, name='mine'))

    state, effects = selfish_miner_step(state, gossip(foreign_chain(1)[0]))

    released = [e.payload.block.height for e in effects if isinstance(e, Send)]
    assert released == [1, 2]
    assert state.private == []
    assert marks(effects, 'selfish_release')[0].data == {'blocks': 2, 'lead': 1}


def test_selfish_miner_adopts_longer_public_chain():
    """Test that falling behind discards the private branch."""
    state = make_state(MinerPolicy.SELFISH)
    state, _ = selfish_miner_step(state, Fire(at=10.0, name='mine'))
    first, second = foreign_chain(2)

    state, _ = selfish_miner_step(state, gossip(second))
    state, effects = selfish_miner_step(state, gossip(first))

    assert state.private == []
    assert state.mining_tip == second.hash
    assert marks(effects, 'selfish_adopt')[0].data == {'discarded': 1}


# Networked runs


def test_common_prefix_holds():
    """Test prefix ordering of chains cut by the confirmation depth."""
    a = [b'g', b'1', b'2', b'3']
    b = [b'g', b'1', b'x', b'y']

    assert common_prefix_holds([a, b], 2)
    assert not common_prefix_holds([a, b], 1)


def test_all_honest_network_gossip_and_prefix():
    """Test that honest miners agree on a common prefix and gossip N-1 copies per block."""
    outcome = nakamoto_run(
        4,
        model=SynchronyModel(delta_ms=100.0),
        seed=3,
        blocks=40,
        difficulty_ms=10_000.0,
        scheme=SCHEME,
    )

    assert outcome.total_mined > 0
    assert outcome.messages_per_block == pytest.approx(3.0)
    assert outcome.common_prefix
    assert outcome.main_chain_length <= outcome.total_mined


def test_nakamoto_run_is_deterministic():
    """Test that equal seeds give identical traces."""
    kwargs = dict(model=SynchronyModel(delta_ms=50.0), seed=9, blocks=10, scheme=SCHEME)

    first = nakamoto_run(3, **kwargs)
    second = nakamoto_run(3, **kwargs)

    assert first.trace.digest() == second.trace.digest()
