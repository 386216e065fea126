"""Quorum arithmetic and the deterministic majority function."""

from collections import Counter
from collections.abc import Sequence
from enum import StrEnum

from pydantic import BaseModel, ConfigDict

from src.core.bft.errors import InvalidFaultBound, QuorumInfeasible


class BftProtocol(StrEnum):
    OM = 'om'
    VR = 'vr'
    PBFT = 'pbft'


class QuorumParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    protocol: BftProtocol
    f: int
    n_min: int
    quorum: int


def quorum_params(protocol: BftProtocol, f: int) -> QuorumParams:
    """
    Minimum roster and quorum size for tolerating f faults.

    OM and PBFT tolerate Byzantine faults and need 3f+1 replicas with 2f+1
    agreeing; VR tolerates crashes with 2f+1 replicas and a quorum of f+1
    (f PrepareOKs plus the primary).

    Raises:
        InvalidFaultBound: If f is negative.
    """
    if f < 0:
        raise InvalidFaultBound(f)
    if protocol == BftProtocol.VR:
        return QuorumParams(protocol=protocol, f=f, n_min=2 * f + 1, quorum=f + 1)
    return QuorumParams(protocol=protocol, f=f, n_min=3 * f + 1, quorum=2 * f + 1)


def check_roster(protocol: BftProtocol, n: int, f: int) -> QuorumParams:
    """Raise QuorumInfeasible unless n replicas can tolerate f faults."""
    params = quorum_params(protocol, f)
    if n < params.n_min:
        raise QuorumInfeasible(protocol.value.upper(), n, f, params.n_min)
    return params


def majority[T](values: Sequence[T]) -> T:
    """
    Most frequent value; among equally frequent values the smallest.

    Every loyal node computing over the same multiset picks the same value.
    """
    if not values:
        raise ValueError('majority of an empty sequence')
    counts = Counter(values)
    top = max(counts.values())
    return min(value for value, count in counts.items() if count == top)
