"""
Threshold secret sharing with hash commitments.

Shamir sharing over the prime field just above 2^256; each share is published
with a hash commitment so any holder can check it without learning the secret.
"""

from functools import cache

import sympy
from pydantic import BaseModel, ConfigDict, Field

from src.core.crypto.errors import (
    InconsistentShares,
    InsufficientShares,
    InvalidSharingParameters,
    ShareVerificationFailed,
)
from src.core.crypto.hashing import DIGEST_SIZE, Digest256, hash_concat, u64

SHARE_SIZE = 33


@cache
def field_prime() -> int:
    """Smallest prime above 2^256; every 32-byte secret is a field element."""
    return int(sympy.nextprime(2**256))


class PvssShare(BaseModel):
    model_config = ConfigDict(frozen=True)

    index: int = Field(ge=1)
    value: int = Field(ge=0)

    def to_bytes(self) -> bytes:
        return self.value.to_bytes(SHARE_SIZE, 'big')

    def canonical_bytes(self) -> bytes:
        return u64(self.index) + self.to_bytes()

    @classmethod
    def from_bytes(cls, index: int, data: bytes) -> 'PvssShare':
        return cls(index=index, value=int.from_bytes(data, 'big'))


class PvssDeal(BaseModel):
    """A dealt secret: n shares, recovery threshold t and one commitment per share."""

    model_config = ConfigDict(frozen=True)

    n: int
    t: int
    shares: tuple[PvssShare, ...]
    commitments: tuple[Digest256, ...]

    def share(self, index: int) -> PvssShare:
        return self.shares[index - 1]


def commit_share(share: PvssShare) -> bytes:
    return hash_concat(b'pvss/commit', u64(share.index), share.to_bytes())


def _coefficients(secret: bytes, t: int, nonce: bytes) -> list[int]:
    prime = field_prime()
    coeffs = [int.from_bytes(secret, 'big')]
    for k in range(1, t):
        material = hash_concat(b'pvss/coef', nonce, secret, u64(k))
        coeffs.append(int.from_bytes(material, 'big') % prime)
    return coeffs


def _evaluate(coeffs: list[int], x: int) -> int:
    prime = field_prime()
    acc = 0
    for coeff in reversed(coeffs):
        acc = (acc * x + coeff) % prime
    return acc


def pvss_deal(secret: bytes, n: int, t: int, *, nonce: bytes = b'') -> PvssDeal:
    """
    Split a 32-byte secret into n shares with threshold t.

    Polynomial coefficients are derived from (nonce, secret), so dealing is
    deterministic; callers that need fresh polynomials vary the nonce.

    Args:
        secret: The 32-byte value to share.
        n: Number of shares.
        t: Shares required for recovery.
        nonce: Dealer-specific domain separator.

    Returns:
        The PvssDeal holding shares 1..n and their commitments.

    Raises:
        InvalidSharingParameters: If not 1 <= t <= n, or the secret is not 32 bytes.
    """
    if not 1 <= t <= n or len(secret) != DIGEST_SIZE:
        raise InvalidSharingParameters(n, t)

    coeffs = _coefficients(secret, t, nonce)
    shares = tuple(
        PvssShare(index=x, value=_evaluate(coeffs, x)) for x in range(1, n + 1)
    )
    return PvssDeal(
        n=n,
        t=t,
        shares=shares,
        commitments=tuple(commit_share(share) for share in shares),
    )


def verify_share(commitments: tuple[bytes, ...], share: PvssShare) -> bool:
    """Check a share against a published commitment list."""
    if not 1 <= share.index <= len(commitments):
        return False
    return commit_share(share) == commitments[share.index - 1]


def pvss_verify_share(deal: PvssDeal, index: int) -> bool:
    if not 1 <= index <= len(deal.shares):
        return False
    share = deal.share(index)
    return share.index == index and verify_share(deal.commitments, share)


def pvss_recover(
    shares: list[PvssShare],
    t: int,
    commitments: tuple[bytes, ...] | None = None,
) -> bytes:
    """
    Recover the dealt secret by Lagrange interpolation at zero.

    Args:
        shares: At least t shares with distinct indices.
        t: The deal's threshold; only the first t shares are used.
        commitments: When given, every share is checked before use.

    Returns:
        The 32-byte secret.

    Raises:
        InsufficientShares: Fewer than t shares, or duplicate indices.
        ShareVerificationFailed: A share does not match its commitment.
        InconsistentShares: The interpolated value is not a valid secret.
    """
    indices = [share.index for share in shares]
    if len(set(indices)) != len(indices):
        raise InsufficientShares(len(set(indices)), t, duplicates=True)
    if len(shares) < t:
        raise InsufficientShares(len(shares), t)

    if commitments is not None:
        for share in shares:
            if not verify_share(commitments, share):
                raise ShareVerificationFailed(share.index)

    prime = field_prime()
    chosen = shares[:t]
    secret = 0
    for i, share_i in enumerate(chosen):
        numerator, denominator = 1, 1
        for j, share_j in enumerate(chosen):
            if i == j:
                continue
            numerator = numerator * (-share_j.index) % prime
            denominator = denominator * (share_i.index - share_j.index) % prime
        secret = (secret + share_i.value * numerator * pow(denominator, -1, prime)) % prime

    if secret >= 1 << (8 * DIGEST_SIZE):
        raise InconsistentShares([share.index for share in chosen])
    return secret.to_bytes(DIGEST_SIZE, 'big')
