"""Domain exceptions for the classical BFT protocols."""


class BftError(Exception):
    """Base exception for classical BFT errors."""

    pass


class InvalidFaultBound(BftError):
    """Raised when a negative fault bound is requested."""

    def __init__(self, f: int) -> None:
        self.f = f
        super().__init__(f'Fault bound must be non-negative, got f={f}')


class QuorumInfeasible(BftError):
    """Raised when a roster is too small to tolerate f faults."""

    def __init__(self, protocol: str, n: int, f: int, n_min: int) -> None:
        self.protocol = protocol
        self.n = n
        self.f = f
        self.n_min = n_min
        super().__init__(
            f'{protocol} with f={f} needs at least {n_min} replicas, roster has {n}'
        )
