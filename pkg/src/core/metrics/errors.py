"""Domain exceptions for trace measurements."""


class MetricsError(Exception):
    """Base exception for measurement errors."""

    pass


class MissingPhaseMarker(MetricsError):
    """Raised when a trace lacks the markers a latency component is measured from."""

    def __init__(self, phase: str, label: str) -> None:
        self.phase = phase
        self.label = label
        super().__init__(f'Cannot measure {phase}: trace has no usable {label!r} markers')


class InvalidDuration(MetricsError):
    """Raised when a throughput is requested for a non-positive block cycle."""

    def __init__(self, seconds: float) -> None:
        self.seconds = seconds
        super().__init__(f'Block cycle time must be positive, got {seconds} s')


