"""Domain exceptions for the Nakamoto consensus simulation."""


class NakamotoError(Exception):
    """Base exception for Nakamoto simulation errors."""

    pass


class InvalidWeights(NakamotoError):
    """Raised when hash-power weights are negative or sum to zero."""

    def __init__(self, weights: list[float]) -> None:
        self.weights = weights
        super().__init__(f'Hash-power weights must be non-negative with a positive sum: {weights}')


class InvalidRaceParameters(NakamotoError):
    """Raised when an attacker share or confirmation depth is out of range."""

    def __init__(self, p: float, m: int) -> None:
        self.p = p
        self.m = m
        super().__init__(f'Attacker share must lie in [0, 1] and depth be >= 0, got p={p}, m={m}')
