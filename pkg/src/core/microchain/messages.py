"""Wire payloads of the Microchain validators and workload client."""

from src.core.crypto import PvssShare
from src.core.ledger import Block, Transaction
from src.core.microchain.sortition import SortitionTicket
from src.core.microchain.voting import Vote
from src.core.netsim import Message


class TxAnnounce(Message):
    TAG = 0x40

    tx: Transaction


class BlockAnnounce(Message):
    TAG = 0x41

    block: Block


class VoteMsg(Message):
    TAG = 0x42

    vote: Vote


class TicketMsg(Message):
    TAG = 0x43

    ticket: SortitionTicket


class DealMsg(Message):
    """Commitments of a dealer's secret, with the recipient's share when it is a member."""

    TAG = 0x44

    dealer: bytes
    dynasty_id: int
    commitments: tuple[bytes, ...]
    share: PvssShare | None = None


class RevealMsg(Message):
    TAG = 0x45

    revealer: bytes
    dynasty_id: int
    dealers: tuple[bytes, ...]
    shares: tuple[PvssShare, ...]
