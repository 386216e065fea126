"""Domain exceptions for cryptographic primitives."""


class CryptoError(Exception):
    """Base exception for cryptographic errors."""

    pass


class UnknownSignatureScheme(CryptoError):
    """Raised when a signature scheme name is not registered."""

    def __init__(self, name: str, available: list[str]) -> None:
        self.name = name
        self.available = available
        super().__init__(
            f"Unknown signature scheme '{name}'. Available: {', '.join(available)}"
        )


class InvalidSharingParameters(CryptoError):
    """Raised when a PVSS deal is requested with an impossible (n, t)."""

    def __init__(self, n: int, t: int) -> None:
        self.n = n
        self.t = t
        super().__init__(f'PVSS requires 1 <= t <= n, got n={n}, t={t}')


class InsufficientShares(CryptoError):
    """Raised when recovery is attempted below threshold or with duplicate indices."""

    def __init__(self, provided: int, threshold: int, duplicates: bool = False) -> None:
        self.provided = provided
        self.threshold = threshold
        self.duplicates = duplicates
        detail = ' (duplicate share indices)' if duplicates else ''
        super().__init__(
            f'Need {threshold} distinct shares to recover, got {provided}{detail}'
        )


class ShareVerificationFailed(CryptoError):
    """Raised when a share does not match its dealer's commitment."""

    def __init__(self, index: int) -> None:
        self.index = index
        super().__init__(f'Share {index} does not match its commitment')


class InconsistentShares(CryptoError):
    """Raised when interpolation yields a value outside the secret domain."""

    def __init__(self, indices: list[int]) -> None:
        self.indices = indices
        super().__init__(
            f'Shares {indices} do not interpolate to a 32-byte secret'
        )
