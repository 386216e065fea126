"""Domain exceptions for the Microchain final-committee protocol."""

from typing import Any


class MicrochainError(Exception):
    """Base exception for Microchain errors."""

    pass


class EmptyValidatorSet(MicrochainError):
    """Raised when genesis is requested without validators."""

    def __init__(self) -> None:
        super().__init__('Genesis needs at least one validator')


class DuplicateValidator(MicrochainError):
    """Raised when a roster lists the same public key twice."""

    def __init__(self, pk: bytes) -> None:
        self.pk = pk
        super().__init__(f'Validator {pk.hex()[:12]} listed more than once')


class InsufficientCandidates(MicrochainError):
    """Raised when fewer than K validators with positive credit hold valid tickets."""

    def __init__(self, k: int, available: int) -> None:
        self.k = k
        self.available = available
        super().__init__(
            f'Committee of {k} requested but only {available} eligible candidates'
        )


class InvalidPocParameters(MicrochainError):
    """Raised when the eligibility target cannot be computed."""

    def __init__(self, credit: int, total_credit: int, rho: float) -> None:
        self.credit = credit
        self.total_credit = total_credit
        self.rho = rho
        super().__init__(
            f'Need 0 <= credit <= total, total > 0 and rho > 0; '
            f'got credit={credit}, total={total_credit}, rho={rho}'
        )


class ConflictingFinality(MicrochainError):
    """Raised when two checkpoints of one epoch both cross the finality threshold."""

    def __init__(self, epoch: int, evidence: dict[str, Any]) -> None:
        self.epoch = epoch
        self.evidence = evidence
        super().__init__(f'Conflicting checkpoints finalized in epoch {epoch}')
