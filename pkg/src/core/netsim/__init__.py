"""Deterministic discrete-event network simulator."""

from src.core.netsim.adversary import (
    AdversarySpec,
    Behavior,
    Crash,
    Delay,
    Equivocate,
    Outbound,
    Withhold,
    adversary_transform,
)
from src.core.netsim.errors import (
    DuplicateNode,
    NetsimError,
    TruncatedRun,
    UnknownRecipient,
)
from src.core.netsim.events import (
    CancelTimer,
    Deliver,
    Effect,
    Envelope,
    Event,
    Fire,
    Halt,
    Mark,
    Send,
    SetTimer,
    Start,
    broadcast,
    send_to,
)
from src.core.netsim.messages import TAGS, Message, SignedMessage
from src.core.netsim.model import SynchronyKind, SynchronyModel
from src.core.netsim.node import ProtocolNode, StateMachineNode
from src.core.netsim.simulator import DEFAULT_EVENT_BUDGET, Network, Simulator, run
from src.core.netsim.trace import Trace, TraceRecord

__all__ = [
    'AdversarySpec',
    'Behavior',
    'Crash',
    'Delay',
    'Equivocate',
    'Withhold',
    'Outbound',
    'adversary_transform',
    'Envelope',
    'Event',
    'Start',
    'Deliver',
    'Fire',
    'Effect',
    'Send',
    'SetTimer',
    'CancelTimer',
    'Mark',
    'Halt',
    'broadcast',
    'send_to',
    'TAGS',
    'Message',
    'SignedMessage',
    'SynchronyKind',
    'SynchronyModel',
    'ProtocolNode',
    'StateMachineNode',
    'DEFAULT_EVENT_BUDGET',
    'Network',
    'Simulator',
    'run',
    'Trace',
    'TraceRecord',
    'NetsimError',
    'UnknownRecipient',
    'DuplicateNode',
    'TruncatedRun',
]
