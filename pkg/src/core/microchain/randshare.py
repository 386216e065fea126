"""
RandShare: the committee's agreement on the next epoch's randomness.

Each member deals a fresh secret with threshold t to the members, then every
member reveals the shares it holds. A dealer's secret counts once at least t
valid shares of it are revealed; the output hashes the recovered secrets in
dealer-key order. With fewer than t recovered secrets the session fails and
the previous seed is re-hashed instead.
"""

import logging
from collections.abc import Collection, Mapping, Sequence
from enum import StrEnum

from pydantic import BaseModel, ConfigDict

from src.core.crypto import (
    CryptoError,
    PvssDeal,
    PvssShare,
    hash_concat,
    pvss_deal,
    pvss_recover,
    short_hex,
    verify_share,
)
from src.core.microchain.dynasty import Dynasty

logger = logging.getLogger(__name__)


def default_threshold(k: int) -> int:
    """floor(2K/3) + 1, capped at K."""
    return min(k, 2 * k // 3 + 1)


def fallback_seed(seed: bytes) -> bytes:
    return hash_concat(seed, b'fallback')


def deal_secret(dynasty: Dynasty, dealer: bytes, secret: bytes, t: int) -> PvssDeal:
    return pvss_deal(secret, dynasty.size, t, nonce=dealer)


class SessionStatus(StrEnum):
    DEALING = 'dealing'
    REVEALING = 'revealing'
    COMPLETE = 'complete'


class RandShareOutput(BaseModel):
    model_config = ConfigDict(frozen=True)

    seed: bytes
    recovered: tuple[bytes, ...]
    fallback: bool


class RandShareSession:
    """One member's (or observer's) view of a session."""

    def __init__(self, dynasty: Dynasty, previous_seed: bytes, t: int | None = None) -> None:
        self.dynasty = dynasty
        self.previous_seed = previous_seed
        self.t = t or default_threshold(dynasty.size)
        self.commitments: dict[bytes, tuple[bytes, ...]] = {}
        self.held: dict[bytes, PvssShare] = {}
        self.revealed: dict[bytes, dict[int, PvssShare]] = {}
        self.revealers: set[bytes] = set()
        self.output: RandShareOutput | None = None

    @property
    def status(self) -> SessionStatus:
        if self.output is not None:
            return SessionStatus.COMPLETE
        return SessionStatus.REVEALING if self.revealers else SessionStatus.DEALING

    def add_deal(
        self, dealer: bytes, commitments: tuple[bytes, ...], share: PvssShare | None = None
    ) -> bool:
        """Record a dealer's commitments and, for members, the share addressed to us."""
        if not self.dynasty.is_member(dealer) or len(commitments) != self.dynasty.size:
            return False
        if dealer in self.commitments:
            return self.commitments[dealer] == commitments
        self.commitments[dealer] = commitments
        if share is not None:
            if not verify_share(commitments, share):
                logger.debug('bad share from dealer %s', short_hex(dealer))
                return False
            self.held[dealer] = share
        return True

    def add_reveal(self, revealer: bytes, shares: Sequence[tuple[bytes, PvssShare]]) -> int:
        """
        Record revealed shares; only shares carrying the revealer's own index count.

        Shares are checked against the dealer's commitments when combining, so
        a reveal may arrive before the deal it refers to.
        """
        if not self.dynasty.is_member(revealer):
            return 0
        index = self.dynasty.index_of(revealer)
        self.revealers.add(revealer)
        accepted = 0
        for dealer, share in shares:
            if share.index == index and self.dynasty.is_member(dealer):
                self.revealed.setdefault(dealer, {})[index] = share
                accepted += 1
        return accepted

    def my_reveal(self) -> list[tuple[bytes, PvssShare]]:
        return sorted(self.held.items())

    def _valid_reveals(self, dealer: bytes) -> list[PvssShare]:
        commitments = self.commitments[dealer]
        shares = self.revealed.get(dealer, {}).values()
        return sorted(
            (s for s in shares if verify_share(commitments, s)), key=lambda s: s.index
        )

    def combine(self) -> RandShareOutput:
        """Recover every dealer with at least t revealed shares and hash the secrets."""
        secrets: dict[bytes, bytes] = {}
        for dealer in sorted(self.commitments):
            shares = self._valid_reveals(dealer)
            if len(shares) < self.t:
                continue
            try:
                secrets[dealer] = pvss_recover(shares, self.t, self.commitments[dealer])
            except CryptoError as exc:
                logger.debug('cannot recover dealer %s: %s', short_hex(dealer), exc)
        if len(secrets) < self.t:
            logger.info(
                'randshare for dynasty %d recovered %d < %d secrets, using fallback',
                self.dynasty.id,
                len(secrets),
                self.t,
            )
            self.output = RandShareOutput(
                seed=fallback_seed(self.previous_seed), recovered=tuple(secrets), fallback=True
            )
        else:
            self.output = RandShareOutput(
                seed=hash_concat(*(secrets[d] for d in sorted(secrets))),
                recovered=tuple(sorted(secrets)),
                fallback=False,
            )
        return self.output


class RandShareOutcome(BaseModel):
    model_config = ConfigDict(frozen=True)

    output: RandShareOutput
    per_member: dict[bytes, bytes]

    @property
    def agreed(self) -> bool:
        return len(set(self.per_member.values())) <= 1


def run_randshare(
    dynasty: Dynasty,
    secrets: Mapping[bytes, bytes],
    *,
    t: int | None = None,
    previous_seed: bytes | None = None,
    withhold_deal: Collection[bytes] = (),
    withhold_reveal: Collection[bytes] = (),
) -> RandShareOutcome:
    """
    Run a session among the members with reliable delivery.

    Args:
        dynasty: The committee.
        secrets: Each dealer's 32-byte secret.
        t: Threshold; floor(2K/3) + 1 by default.
        previous_seed: Seed re-hashed on failure (the dynasty seed by default).
        withhold_deal: Members that never deal.
        withhold_reveal: Members that never reveal.

    Returns:
        The output at the first honest member and every honest member's seed.
    """
    previous = previous_seed if previous_seed is not None else dynasty.seed
    sessions = {pk: RandShareSession(dynasty, previous, t) for pk in dynasty.pks}
    for dealer in dynasty.pks:
        if dealer in withhold_deal:
            continue
        deal = deal_secret(dynasty, dealer, secrets[dealer], sessions[dealer].t)
        for holder, session in sessions.items():
            session.add_deal(dealer, deal.commitments, deal.share(dynasty.index_of(holder)))
    reveals = {
        pk: sessions[pk].my_reveal() for pk in dynasty.pks if pk not in withhold_reveal
    }
    for session in sessions.values():
        for revealer, shares in reveals.items():
            session.add_reveal(revealer, shares)
    honest = [pk for pk in dynasty.pks if pk not in withhold_deal and pk not in withhold_reveal]
    per_member = {pk: sessions[pk].combine().seed for pk in honest or dynasty.pks}
    first = (honest or list(dynasty.pks))[0]
    return RandShareOutcome(output=sessions[first].output, per_member=per_member)
