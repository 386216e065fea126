"""
Verifiable committee sortition.

Every validator evaluates its VRF on (seed, "sortition", dynasty id) and
publishes the result as a ticket. The committee is a credit-weighted sample
without replacement: ticket fraction u and credit c give the key u^(1/c), and
the K largest keys win. Anyone holding the tickets can recheck the result.
"""

import logging
import math
from collections.abc import Mapping, Sequence

from pydantic import BaseModel, ConfigDict

from src.core.crypto import KeyPair, VrfOutput, short_hex, u64, vrf_evaluate, vrf_verify
from src.core.microchain.dynasty import Dynasty, make_dynasty
from src.core.microchain.errors import InsufficientCandidates

logger = logging.getLogger(__name__)


class SortitionTicket(BaseModel):
    model_config = ConfigDict(frozen=True)

    pk: bytes
    dynasty_id: int
    output: VrfOutput


def sortition_input(seed: bytes, dynasty_id: int) -> bytes:
    return seed + b'sortition' + u64(dynasty_id)


def make_ticket(
    keys: KeyPair, seed: bytes, dynasty_id: int, scheme: str | None = None
) -> SortitionTicket:
    output = vrf_evaluate(keys.secret, sortition_input(seed, dynasty_id), scheme or keys.scheme)
    return SortitionTicket(pk=keys.public, dynasty_id=dynasty_id, output=output)


def verify_ticket(ticket: SortitionTicket, seed: bytes, scheme: str | None = None) -> bool:
    return vrf_verify(
        ticket.pk, sortition_input(seed, ticket.dynasty_id), ticket.output, scheme
    )


def selection_key(fraction: float, credit: int) -> float:
    """log(u^(1/c)); larger wins, zero credit never does."""
    if credit <= 0 or fraction <= 0.0:
        return -math.inf
    return math.log(fraction) / credit


def select_committee(
    tickets: Sequence[SortitionTicket],
    credits: Mapping[bytes, int],
    seed: bytes,
    k: int,
    *,
    dynasty_id: int,
    start_height: int = 0,
    scheme: str | None = None,
) -> Dynasty:
    """
    Choose the next dynasty from published tickets.

    Args:
        tickets: One ticket per validator; invalid or duplicate ones are ignored.
        credits: Credit ledger snapshot used for weighting.
        seed: Epoch randomness the tickets were drawn on.
        k: Committee size.
        dynasty_id: Id of the dynasty being selected.
        start_height: First height the dynasty is responsible for.
        scheme: Signature scheme of the VRF proofs.

    Returns:
        The selected Dynasty carrying each member's credit.

    Raises:
        InsufficientCandidates: Fewer than k positive-credit validators hold
            valid tickets.
    """
    keyed: dict[bytes, float] = {}
    for ticket in tickets:
        if ticket.pk in keyed or ticket.dynasty_id != dynasty_id:
            continue
        if not verify_ticket(ticket, seed, scheme):
            logger.warning('ignoring invalid sortition ticket from %s', short_hex(ticket.pk))
            continue
        credit = credits.get(ticket.pk, 0)
        if credit > 0:
            keyed[ticket.pk] = selection_key(ticket.output.fraction, credit)
    if len(keyed) < k:
        raise InsufficientCandidates(k, len(keyed))
    ranked = sorted(keyed, key=lambda pk: (-keyed[pk], pk))[:k]
    return make_dynasty(
        [(pk, credits[pk]) for pk in ranked],
        dynasty_id=dynasty_id,
        seed=seed,
        start_height=start_height,
    )


def draw_committee(
    validators: Sequence[tuple[KeyPair, int]],
    seed: bytes,
    k: int,
    *,
    dynasty_id: int,
    start_height: int = 0,
    scheme: str | None = None,
) -> tuple[Dynasty, list[SortitionTicket]]:
    """Draw every validator's ticket and select; returns the tickets as proof."""
    tickets = [make_ticket(keys, seed, dynasty_id, scheme) for keys, _ in validators]
    credits = {keys.public: credit for keys, credit in validators}
    dynasty = select_committee(
        tickets,
        credits,
        seed,
        k,
        dynasty_id=dynasty_id,
        start_height=start_height,
        scheme=scheme,
    )
    return dynasty, tickets
