"""
Block-cycle latency components read back from Microchain phase markers.

The validator marks every phase boundary it passes (tx_sent, tx_held,
block_proposed, block_verified, vote_start, finalized); each component below
is a difference of marker times, and the report keeps the sequence numbers of
the markers it used so any reader can recompute it from the raw trace.
"""

from collections import defaultdict
from collections.abc import Iterable
from statistics import fmean

from pydantic import BaseModel, ConfigDict, computed_field

from src.core.metrics.errors import MissingPhaseMarker
from src.core.netsim import Trace, TraceRecord


class LatencyReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    k: int
    block_size: int
    t_ct: float
    t_bp: float
    t_cf: float
    events: dict[str, tuple[int, ...]]

    @computed_field
    @property
    def t_bc(self) -> float:
        return self.t_ct + self.t_bp + self.t_cf


def _member_marks(trace: Trace, label: str, key: str) -> dict[object, list[TraceRecord]]:
    """Member markers grouped by `data[key]`, first marker per node only."""
    grouped: dict[object, dict[int, TraceRecord]] = defaultdict(dict)
    for record in trace.marks(label):
        data = record.data or {}
        if not data.get('member') or record.sender is None:
            continue
        grouped[data[key]].setdefault(record.sender, record)
    return {k: list(by_node.values()) for k, by_node in grouped.items()}


def _complete(
    starts: dict[object, list[TraceRecord]],
    ends: dict[object, list[TraceRecord]],
    k: int,
) -> Iterable[tuple[float, list[int]]]:
    """Start-to-last-member spans for every key reached by at least k members."""
    for key, opened in starts.items():
        closed = ends.get(key, [])
        if len(closed) < k:
            continue
        first = min(opened, key=lambda r: r.time)
        last = max(closed, key=lambda r: r.time)
        yield last.time - first.time, [first.seq, last.seq]


def _component(
    phase: str,
    label: str,
    spans: Iterable[tuple[float, list[int]]],
    events: dict[str, tuple[int, ...]],
) -> float:
    collected = list(spans)
    if not collected:
        raise MissingPhaseMarker(phase, label)
    events[phase] = tuple(seq for _, seqs in collected for seq in seqs)
    return fmean(span for span, _ in collected)


def measure_latencies(trace: Trace, k: int, block_size: int) -> LatencyReport:
    """
    Measure t_ct, t_bp and t_cf of a Microchain run.

    t_ct: client send to the last of k dynasty members holding the
        transaction, averaged over transactions held by k members.
    t_bp: proposal to the last of k members having verified the block,
        averaged over blocks verified by k members.
    t_cf: first vote of an epoch to the last of k members finalizing it,
        averaged over epochs finalized by k members.

    Args:
        trace: Trace of a Microchain run.
        k: Dynasty size the components must cover.
        block_size: Configured block size in bytes, carried into the report.

    Returns:
        The three components, their sum and the defining marker sequence numbers.

    Raises:
        MissingPhaseMarker: If no transaction, block or epoch reached k members.
    """
    events: dict[str, tuple[int, ...]] = {}

    sent = defaultdict(list)
    for record in trace.marks('tx_sent'):
        sent[(record.data or {})['tx']].append(record)
    t_ct = _component(
        't_ct', 'tx_held', _complete(sent, _member_marks(trace, 'tx_held', 'tx'), k), events
    )

    proposed = defaultdict(list)
    for record in trace.marks('block_proposed'):
        proposed[(record.data or {})['block']].append(record)
    verified = _member_marks(trace, 'block_verified', 'block')
    t_bp = _component('t_bp', 'block_verified', _complete(proposed, verified, k), events)

    voting = defaultdict(list)
    for record in trace.marks('vote_start'):
        voting[(record.data or {})['epoch']].append(record)
    finalized = _member_marks(trace, 'finalized', 'epoch')
    t_cf = _component('t_cf', 'finalized', _complete(voting, finalized, k), events)

    return LatencyReport(
        k=k, block_size=block_size, t_ct=t_ct, t_bp=t_bp, t_cf=t_cf, events=events
    )
