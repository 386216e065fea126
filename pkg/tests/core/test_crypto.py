"""Unit tests for hashing, signatures, the VRF and threshold sharing."""

from itertools import combinations

import pytest
from scipy import stats

from src.core.crypto import (
    InsufficientShares,
    InvalidSharingParameters,
    PvssShare,
    ShareVerificationFailed,
    UnknownSignatureScheme,
    hash_data,
    keygen,
    pvss_deal,
    pvss_recover,
    pvss_verify_share,
    sign,
    verify,
    vrf_evaluate,
    vrf_verify,
)
from src.core.crypto.signing import get_scheme

CORPUS = [b'', b'a', b'abc', b'\x00', bytes(range(256)), b'microchain' * 50]


def test_hash_empty_input_matches_reference_digest():
    """Test the empty-input SHA-256 digest."""
    assert hash_data(b'').hex() == (
        'e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855'
    )


def test_hash_is_deterministic_and_sensitive_to_trailing_zero():
    """Test determinism and that appending a zero byte changes the digest."""
    for data in CORPUS:
        assert hash_data(data) == hash_data(data)
        assert hash_data(data) != hash_data(data + b'\x00')
        assert len(hash_data(data)) == 32


@pytest.mark.parametrize('scheme', ['ed25519', 'sim-hash'])
def test_sign_verify_round_trip(scheme: str):
    """Test that signatures verify and are deterministic per (key, message)."""
    keys = keygen(b'node-1', scheme)
    for message in CORPUS:
        signature = sign(keys.secret, message, scheme)
        assert signature == sign(keys.secret, message, scheme)
        assert verify(keys.public, message, signature, scheme)


@pytest.mark.parametrize('scheme', ['ed25519', 'sim-hash'])
def test_verify_rejects_flipped_bit_and_wrong_key(scheme: str):
    """Test binding to both message and public key."""
    keys = keygen(b'node-1', scheme)
    other = keygen(b'node-2', scheme)
    message = b'transfer 10 credits'
    signature = sign(keys.secret, message, scheme)

    flipped = bytes([message[0] ^ 0x01]) + message[1:]
    assert not verify(keys.public, flipped, signature, scheme)
    assert not verify(other.public, message, signature, scheme)


@pytest.mark.parametrize('scheme', ['ed25519', 'sim-hash'])
def test_verify_returns_false_on_malformed_input(scheme: str):
    """Test that malformed keys and signatures never raise."""
    keys = keygen(b'node-1', scheme)
    assert not verify(keys.public, b'm', b'short', scheme)
    assert not verify(b'\x01\x02', b'm', bytes(64), scheme)
    assert not verify(keys.public, b'm', b'', scheme)


def test_keygen_is_deterministic_and_identity_derives_from_public_key():
    """Test that the same seed yields the same keys and node name."""
    first = keygen(7)
    second = keygen(7)
    assert first == second
    assert first.node_name == first.public.hex()[:16]
    assert keygen(8).public != first.public


def test_unknown_scheme_lists_alternatives():
    """Test that an unknown scheme name raises with the registered names."""
    with pytest.raises(UnknownSignatureScheme) as exc_info:
        get_scheme('rsa')
    assert 'ed25519' in exc_info.value.available


def test_vrf_is_deterministic_and_verifiable():
    """Test VRF determinism and honest verification."""
    keys = keygen(b'vrf')
    first = vrf_evaluate(keys.secret, b'seed-1')
    second = vrf_evaluate(keys.secret, b'seed-1')
    assert first == second
    assert vrf_verify(keys.public, b'seed-1', first)
    assert 0.0 <= first.fraction < 1.0


def test_vrf_rejects_proof_from_other_input():
    """Test that a proof for one input never verifies for another."""
    keys = keygen(b'vrf')
    inputs = [f'input-{i}'.encode() for i in range(20)]
    outputs = [vrf_evaluate(keys.secret, data) for data in inputs]
    for i, data in enumerate(inputs):
        for j, output in enumerate(outputs):
            assert vrf_verify(keys.public, data, output) == (i == j)


def test_vrf_rejects_tampered_value():
    """Test that a value not matching the proof is rejected."""
    keys = keygen(b'vrf')
    output = vrf_evaluate(keys.secret, b'x')
    forged = output.model_copy(update={'value': (output.value + 1) % (1 << 64)})
    assert not vrf_verify(keys.public, b'x', forged)


def test_vrf_output_is_uniform():
    """Test uniformity of value / 2^64 with a Kolmogorov-Smirnov test."""
    keys = keygen(b'uniformity')
    fractions = [
        vrf_evaluate(keys.secret, i.to_bytes(8, 'big')).fraction
        for i in range(10_000)
    ]
    result = stats.kstest(fractions, 'uniform')
    assert result.pvalue > 0.01


def test_pvss_recover_any_three_of_five():
    """Test recovery from every 3-subset of a 5-share deal."""
    secret = hash_data(b'epoch secret')
    deal = pvss_deal(secret, n=5, t=3)
    for subset in combinations(deal.shares, 3):
        assert pvss_recover(list(subset), t=3) == secret


def test_pvss_recover_exhaustive_small_parameters():
    """Test recovery from every t-subset for all n <= 8."""
    secret = hash_data(b'exhaustive')
    for n in range(1, 9):
        for t in range(1, n + 1):
            deal = pvss_deal(secret, n=n, t=t, nonce=bytes([n, t]))
            for subset in combinations(deal.shares, t):
                assert pvss_recover(list(subset), t=t) == secret


def test_pvss_recover_below_threshold_raises():
    """Test that two shares cannot recover a threshold-3 secret."""
    deal = pvss_deal(hash_data(b's'), n=5, t=3)
    with pytest.raises(InsufficientShares) as exc_info:
        pvss_recover(list(deal.shares[:2]), t=3)
    assert exc_info.value.provided == 2


def test_pvss_recover_with_duplicate_indices_raises():
    """Test that repeated shares do not count towards the threshold."""
    deal = pvss_deal(hash_data(b's'), n=5, t=3)
    shares = [deal.shares[0], deal.shares[0], deal.shares[1]]
    with pytest.raises(InsufficientShares) as exc_info:
        pvss_recover(shares, t=3)
    assert exc_info.value.duplicates


def test_pvss_verify_share_detects_every_single_byte_flip():
    """Test that flipping any byte of any share breaks its commitment."""
    deal = pvss_deal(hash_data(b'flip'), n=4, t=2)
    for index in range(1, deal.n + 1):
        assert pvss_verify_share(deal, index)
        raw = deal.share(index).to_bytes()
        for position in range(len(raw)):
            tampered = bytearray(raw)
            tampered[position] ^= 0xFF
            bad = PvssShare.from_bytes(index, bytes(tampered))
            shares = list(deal.shares)
            shares[index - 1] = bad
            tampered_deal = deal.model_copy(update={'shares': tuple(shares)})
            assert not pvss_verify_share(tampered_deal, index)


def test_pvss_recover_with_commitments_rejects_tampered_share():
    """Test that recovery refuses a share that fails its commitment."""
    deal = pvss_deal(hash_data(b'c'), n=3, t=2)
    bad = PvssShare(index=1, value=deal.shares[0].value + 1)
    with pytest.raises(ShareVerificationFailed):
        pvss_recover([bad, deal.shares[1]], t=2, commitments=deal.commitments)


def test_pvss_deal_rejects_impossible_threshold():
    """Test parameter validation for the deal."""
    with pytest.raises(InvalidSharingParameters):
        pvss_deal(hash_data(b'x'), n=3, t=4)
    with pytest.raises(InvalidSharingParameters):
        pvss_deal(hash_data(b'x'), n=3, t=0)
