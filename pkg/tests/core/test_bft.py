"""Tests for the classical baselines: quorums, OM, VR and PBFT."""

import pytest

from src.core.bft import (
    BftProtocol,
    InvalidFaultBound,
    Order,
    PbftConfig,
    PbftCommit,
    PbftPrepare,
    PbftPrePrepare,
    PbftReplicaState,
    PbftReply,
    PbftRequest,
    QuorumInfeasible,
    VrEntry,
    VrPrepare,
    VrPrepareOk,
    VrReplicaState,
    VrReply,
    VrRequest,
    VrStartViewChange,
    VrStatus,
    check_roster,
    majority,
    om_message_count,
    om_run,
    om_search,
    pbft_client_accept,
    pbft_run,
    pbft_step,
    prefix_consistent,
    quorum_params,
    vr_run,
    vr_step,
)
from src.core.crypto import keygen
from src.core.netsim import (
    AdversarySpec,
    Crash,
    Deliver,
    Envelope,
    Equivocate,
    Fire,
    Send,
    Withhold,
)

SCHEME = 'sim-hash'


def deliver(payload, sender: int, recipient: int) -> Deliver:
    envelope = Envelope(
        msg_id=1, sender=sender, recipient=recipient, payload=payload, sent_at=0.0, deliver_at=0.0
    )
    return Deliver(at=0.0, envelope=envelope)


def sent(effects: list, kind: type) -> list[Send]:
    return [e for e in effects if isinstance(e, Send) and isinstance(e.payload, kind)]


# Quorums


@pytest.mark.parametrize(
    ('protocol', 'f', 'n_min', 'quorum'),
    [
        (BftProtocol.PBFT, 1, 4, 3),
        (BftProtocol.VR, 1, 3, 2),
        (BftProtocol.PBFT, 0, 1, 1),
        (BftProtocol.OM, 2, 7, 5),
    ],
)
def test_quorum_params(protocol, f, n_min, quorum):
    """Test the per-protocol roster and quorum sizes."""
    params = quorum_params(protocol, f)

    assert (params.n_min, params.quorum) == (n_min, quorum)


def test_negative_fault_bound_rejected():
    """Test that f < 0 is an error."""
    with pytest.raises(InvalidFaultBound):
        quorum_params(BftProtocol.PBFT, -1)


def test_check_roster_rejects_small_pbft():
    """Test that PBFT with N=3, f=1 is infeasible."""
    with pytest.raises(QuorumInfeasible) as exc:
        check_roster(BftProtocol.PBFT, 3, 1)

    assert exc.value.n_min == 4


def test_majority():
    """Test majority with a clear winner, a singleton and a three-way tie."""
    assert majority(['a', 'a', '?']) == 'a'
    assert majority(['x']) == 'x'
    assert majority(['z', 'x', 'y']) == 'x'
    assert majority(['y', 'z', 'x']) == 'x'


# Oral messages


def test_om_loyal_commander_with_traitor_lieutenant():
    """Test that loyal lieutenants obey a loyal commander despite a traitor."""
    adversary = AdversarySpec(behaviors={3: Equivocate(table={1: 'retreat', 2: 'hold'})})

    outcome = om_run(4, 1, Order.ATTACK, adversary, seed=1)

    assert outcome.decisions == {1: Order.ATTACK, 2: Order.ATTACK}
    assert outcome.messages == 9
    assert outcome.expected_messages == 9


def test_om_traitor_commander_cannot_split_lieutenants():
    """Test that x, y, z from a traitor commander still yields one decision."""
    adversary = AdversarySpec(behaviors={0: Equivocate(table={1: 'retreat', 2: 'attack', 3: 'hold'})})

    outcome = om_run(4, 1, Order.ATTACK, adversary, seed=2)

    assert outcome.agreed
    assert len(outcome.decisions) == 3


def test_om_three_generals_split():
    """Test the three-general split: one lieutenant attacks, the other retreats."""
    adversary = AdversarySpec(behaviors={0: Equivocate(table={1: 'attack', 2: 'retreat'})})

    outcome = om_run(3, 1, Order.ATTACK, adversary, seed=0)

    assert not outcome.agreement_possible
    assert outcome.decisions == {1: Order.ATTACK, 2: Order.RETREAT}


def test_om_search_finds_witness_for_three_generals():
    """Test that the adversary search defeats N=3, f=1."""
    witness = om_search(3, 1)

    assert witness is not None
    assert len(set(witness.decisions.values())) > 1 or witness.commander_value not in set(
        witness.decisions.values()
    )


def test_om_exhaustive_search_four_generals():
    """Test that no substitution strategy defeats N=4, f=1 over three values."""
    assert om_search(4, 1) is None


def test_om_sampled_search_seven_generals():
    """Test that sampled strategies do not defeat N=7, f=2."""
    assert om_search(7, 2, samples=20, seed=3) is None


@pytest.mark.parametrize(('n', 'f', 'expected'), [(4, 1, 9), (7, 2, 156), (5, 1, 16)])
def test_om_message_count_matches_recursion(n, f, expected):
    """Test measured and closed-form message counts."""
    outcome = om_run(n, f, Order.RETREAT, seed=n)

    assert om_message_count(n, f) == expected
    assert outcome.messages == expected
    assert outcome.valid


def test_om_silent_commander_defaults_to_retreat():
    """Test that missing orders count as retreat."""
    outcome = om_run(4, 1, Order.ATTACK, AdversarySpec(behaviors={0: Withhold()}))

    assert set(outcome.decisions.values()) == {Order.RETREAT}


# Viewstamped replication


def vr_state(replica: int, **updates) -> VrReplicaState:
    state = VrReplicaState(replica=replica, n=3, f=1, timeout_ms=200.0, heartbeat_ms=50.0)
    return state.model_copy(update=updates)


def test_vr_backup_acks_prepare():
    """Test that a backup extends its log and sends one PrepareOK."""
    entry = VrEntry(client=3, request_id=1, op='put')
    prepare = VrPrepare(view=0, op_number=1, commit_number=0, entry=entry)

    state, effects = vr_step(vr_state(1), deliver(prepare, 0, 1))

    assert state.log == (entry,)
    oks = sent(effects, VrPrepareOk)
    assert len(oks) == 1
    assert oks[0].to == (0,)


def test_vr_primary_executes_after_f_acks():
    """Test that the primary replies after f PrepareOKs."""
    state, effects = vr_step(vr_state(0), deliver(VrRequest(client=3, request_id=1, op='put'), 3, 0))
    assert len(sent(effects, VrPrepare)) == 1

    state, effects = vr_step(state, deliver(VrPrepareOk(view=0, op_number=1, replica=1), 1, 0))

    assert state.executed == ('put',)
    replies = sent(effects, VrReply)
    assert [r.payload.result for r in replies] == ['put@1']
    assert replies[0].to == (3,)


def test_vr_backup_timeout_starts_view_change():
    """Test that a backup timing out moves to view v+1."""
    state, effects = vr_step(vr_state(1), Fire(at=200.0, name='view-change'))

    assert state.status == VrStatus.VIEW_CHANGE
    assert state.view == 1
    (svc,) = sent(effects, VrStartViewChange)
    assert svc.payload.view == 1


def test_vr_stale_view_dropped_and_counted():
    """Test that a Prepare from an older view is dropped with a reason."""
    entry = VrEntry(client=3, request_id=1, op='put')
    prepare = VrPrepare(view=0, op_number=1, commit_number=0, entry=entry)

    state, effects = vr_step(vr_state(1, view=2), deliver(prepare, 0, 1))

    assert effects == []
    assert state.dropped == {'stale-view': 1}


@pytest.mark.parametrize(('n', 'f'), [(3, 1), (5, 2)])
def test_vr_normal_run_is_linear(n, f):
    """Test that one request costs 2N messages."""
    outcome = vr_run(n, f, ['op-1'], seed=4, until_ms=2_000.0)

    assert outcome.results == ('op-1@1',)
    assert outcome.normal_messages == 2 * n
    assert set(outcome.views.values()) == {0}


@pytest.mark.parametrize('seed', range(12))
def test_vr_primary_crash_and_recovery_keep_prefixes(seed):
    """Test prefix consistency across a primary crash, view change and recovery."""
    adversary = AdversarySpec(behaviors={0: Crash(at_ms=300.0, recover_at_ms=4_000.0)})

    outcome = vr_run(3, 1, [f'op-{i}' for i in range(6)], adversary, seed=seed, until_ms=15_000.0)

    assert prefix_consistent(outcome.executed.values())
    assert len(outcome.results) == 6
    assert outcome.views[1] >= 1


def test_prefix_consistent():
    """Test the prefix relation on executed logs."""
    assert prefix_consistent([('a', 'b'), ('a',), ('a', 'b', 'c')])
    assert not prefix_consistent([('a', 'b'), ('a', 'c')])


# PBFT

KEYS = [keygen(f'pbft-replica-{r}', SCHEME) for r in range(4)]
CLIENT = keygen('pbft-client', SCHEME)


def pbft_state(replica: int) -> PbftReplicaState:
    config = PbftConfig(
        replica=replica,
        n=4,
        f=1,
        keys=KEYS[replica],
        publics=tuple(k.public for k in KEYS),
        timeout_ms=200.0,
    )
    return PbftReplicaState(config=config)


def pre_prepare(signer: int = 0) -> PbftPrePrepare:
    request = PbftRequest(client=4, timestamp=1, op='put').signed(CLIENT)
    message = PbftPrePrepare(view=0, seq=1, request_hash=request.digest(), request=request, replica=0)
    return message.signed(KEYS[signer])


def test_pbft_backup_prepares_on_valid_pre_prepare():
    """Test that a valid PrePrepare triggers one Prepare multicast."""
    state, effects = pbft_step(pbft_state(1), deliver(pre_prepare(), 0, 1))

    (prepare,) = sent(effects, PbftPrepare)
    assert prepare.to == (0, 2, 3)
    assert 1 in state.slots


def test_pbft_forged_pre_prepare_dropped():
    """Test that a PrePrepare not signed by the primary is dropped."""
    state, effects = pbft_step(pbft_state(1), deliver(pre_prepare(signer=3), 0, 1))

    assert effects == []
    assert state.dropped == {'bad-signature': 1}


def test_pbft_executes_on_commit_quorum():
    """Test that 2f+1 Commits execute the request and reply to the client."""
    msg = pre_prepare()
    state, _ = pbft_step(pbft_state(1), deliver(msg, 0, 1))
    prepare = PbftPrepare(view=0, seq=1, request_hash=msg.request_hash, replica=2).signed(KEYS[2])
    state, effects = pbft_step(state, deliver(prepare, 2, 1))
    assert len(sent(effects, PbftCommit)) == 1

    for replica in (0, 2):
        commit = PbftCommit(view=0, seq=1, request_hash=msg.request_hash, replica=replica).signed(KEYS[replica])
        state, effects = pbft_step(state, deliver(commit, replica, 1))

    assert state.executed == ('put',)
    (reply,) = sent(effects, PbftReply)
    assert reply.to == (4,)
    assert reply.payload.result == 'put@1'


def reply(replica: int, result: str = 'ok') -> PbftReply:
    return PbftReply(view=0, timestamp=1, client=4, replica=replica, result=result)


def test_client_accepts_on_reply_quorum():
    """Test the client reply rule for f=1."""
    assert pbft_client_accept([reply(0), reply(1), reply(2)], 1).accepted
    assert not pbft_client_accept([reply(0), reply(1)], 1).accepted

    decision = pbft_client_accept([reply(0), reply(1), reply(2), reply(3, 'bad')], 1)

    assert decision.accepted
    assert decision.result == 'ok'
    assert decision.conflicts == 1


def test_client_accept_with_f_plus_one_switch():
    """Test that the f+1 setting accepts two matching replies."""
    assert pbft_client_accept([reply(0), reply(1)], 1, quorum=2).accepted


def test_pbft_normal_run_phase_counts():
    """Test the quadratic phase counters for one request at N=4."""
    outcome = pbft_run(4, 1, ['op-1'], seed=5, scheme=SCHEME)

    assert outcome.results == ('op-1@1',)
    assert outcome.phase_messages == {
        'PbftPrePrepare': 3,
        'PbftPrepare': 9,
        'PbftCommit': 12,
        'PbftReply': 4,
    }
    assert sum(outcome.phase_messages.values()) == 28


@pytest.mark.parametrize(
    'behavior',
    [Equivocate(table={0: 'x', 1: 'y', 2: 'z', 4: 'w'}), Withhold()],
    ids=['equivocating', 'silent'],
)
def test_pbft_byzantine_replica_keeps_safety(behavior):
    """Test that honest replicas execute the same sequence with one Byzantine replica."""
    adversary = AdversarySpec(behaviors={3: behavior})

    outcome = pbft_run(4, 1, ['a', 'b', 'c'], adversary, seed=6, scheme=SCHEME)

    assert outcome.honest_agree
    assert outcome.executed[0] == ('a', 'b', 'c')
    assert outcome.results == ('a@1', 'b@2', 'c@3')


def test_pbft_primary_crash_recovers_through_new_view():
    """Test that a crashed primary is replaced and execution resumes."""
    adversary = AdversarySpec(behaviors={0: Crash(at_ms=0.0)})

    outcome = pbft_run(4, 1, ['a', 'b'], adversary, seed=7, scheme=SCHEME)

    assert outcome.honest_agree
    assert outcome.results == ('a@1', 'b@2')
    assert all(view >= 1 for replica, view in outcome.views.items() if replica != 0)
    assert outcome.trace.marks('pbft_new_view')


def test_pbft_checkpoints_become_stable():
    """Test that checkpoints every two requests stabilise at all honest replicas."""
    outcome = pbft_run(4, 1, ['a', 'b', 'c', 'd'], seed=8, checkpoint_interval=2, scheme=SCHEME)

    assert set(outcome.stable_checkpoints.values()) == {4}
    assert outcome.trace.sent['PbftCheckpoint'] == 8
