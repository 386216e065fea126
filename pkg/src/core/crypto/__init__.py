"""Cryptographic primitives: hashing, signatures, VRF and threshold sharing."""

from src.core.crypto.errors import (
    CryptoError,
    InconsistentShares,
    InsufficientShares,
    InvalidSharingParameters,
    ShareVerificationFailed,
    UnknownSignatureScheme,
)
from src.core.crypto.hashing import (
    DIGEST_SIZE,
    ZERO_DIGEST,
    Digest256,
    hash_concat,
    hash_data,
    leading_u64,
    short_hex,
    u64,
)
from src.core.crypto.pvss import (
    PvssDeal,
    PvssShare,
    pvss_deal,
    pvss_recover,
    pvss_verify_share,
    verify_share,
)
from src.core.crypto.signing import KeyPair, get_scheme, keygen, sign, verify
from src.core.crypto.vrf import VrfOutput, vrf_evaluate, vrf_verify

__all__ = [
    'DIGEST_SIZE',
    'ZERO_DIGEST',
    'Digest256',
    'hash_data',
    'hash_concat',
    'leading_u64',
    'short_hex',
    'u64',
    'KeyPair',
    'keygen',
    'get_scheme',
    'sign',
    'verify',
    'VrfOutput',
    'vrf_evaluate',
    'vrf_verify',
    'PvssDeal',
    'PvssShare',
    'pvss_deal',
    'pvss_recover',
    'pvss_verify_share',
    'verify_share',
    'CryptoError',
    'UnknownSignatureScheme',
    'InvalidSharingParameters',
    'InsufficientShares',
    'ShareVerificationFailed',
    'InconsistentShares',
]
