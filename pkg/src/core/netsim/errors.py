"""Domain exceptions for the network simulator."""

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from src.core.netsim.trace import Trace


class NetsimError(Exception):
    """Base exception for simulator errors."""

    pass


class UnknownRecipient(NetsimError):
    """Raised when a node addresses a node id that is not registered."""

    def __init__(self, sender: int, recipient: int) -> None:
        self.sender = sender
        self.recipient = recipient
        super().__init__(f'Node {sender} sent to unregistered node {recipient}')


class DuplicateNode(NetsimError):
    """Raised when two nodes register the same id."""

    def __init__(self, node_id: int) -> None:
        self.node_id = node_id
        super().__init__(f'Node id {node_id} registered twice')


class TruncatedRun(NetsimError):
    """Raised when a run exceeds its event budget; carries the partial trace."""

    def __init__(self, trace: 'Trace', budget: int) -> None:
        self.trace = trace
        self.budget = budget
        super().__init__(
            f'Event budget of {budget} exceeded at t={trace.end_time:.3f} ms'
        )
