"""Exact per-phase message counts and their growth exponent over a size sweep."""

from collections.abc import Mapping, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy import stats

from src.core.bft.pbft import PHASES as PBFT_PHASES
from src.core.netsim import Trace

PROTOCOL_PHASES: dict[str, tuple[str, ...]] = {
    'om': ('OmValue',),
    'pbft': PBFT_PHASES,
    'vr': ('VrRequest', 'VrPrepare', 'VrPrepareOk', 'VrReply'),
    'nakamoto': ('BlockGossip',),
    'microchain': ('BlockAnnounce', 'VoteMsg', 'DealMsg', 'RevealMsg', 'TicketMsg', 'TxAnnounce'),
}


class ComplexityReport(BaseModel):
    """
    Message counts of one protocol across network sizes.

    `slope` is the least-squares exponent of the per-unit total against the
    per-node fan-out N - 1, fitted in log-log space; None with fewer than two
    usable sizes.
    """

    model_config = ConfigDict(frozen=True)

    protocol: str
    phases: tuple[str, ...]
    counts: dict[int, dict[str, int]]
    totals: dict[int, int]
    per_unit: dict[int, float]
    slope: float | None
    r_squared: float | None

    def rows(self) -> list[dict[str, int | float | str]]:
        """One flat row per size, ready for a CSV writer."""
        return [
            {
                'protocol': self.protocol,
                'n': n,
                **self.counts[n],
                'total': self.totals[n],
                'per_unit': self.per_unit[n],
            }
            for n in sorted(self.counts)
        ]


def growth_exponent(xs: Sequence[float], ys: Sequence[float]) -> tuple[float | None, float | None]:
    """
    Least-squares slope of log(y) against log(x), and its r squared.

    Points with a non-positive coordinate are skipped; fewer than two usable
    points give (None, None).
    """
    points = [(x, y) for x, y in zip(xs, ys, strict=True) if x > 0 and y > 0]
    if len({x for x, _ in points}) < 2:
        return None, None
    fit = stats.linregress(np.log([x for x, _ in points]), np.log([y for _, y in points]))
    return float(fit.slope), float(fit.rvalue**2)


def message_complexity(
    protocol: str,
    traces: Mapping[int, Trace],
    *,
    phases: Sequence[str] | None = None,
    units: Mapping[int, float] | None = None,
) -> ComplexityReport:
    """
    Count messages per phase and fit their growth.

    Args:
        protocol: Protocol name; selects the default phase list.
        traces: One trace per network size N.
        phases: Message class names to count; the protocol's list by default.
        units: Optional divisor per size (e.g. blocks mined) so that runs of
            different length compare.

    Returns:
        A ComplexityReport with counts taken straight from the send counters.
    """
    phases = tuple(phases or PROTOCOL_PHASES[protocol])
    counts = {n: {phase: trace.sent[phase] for phase in phases} for n, trace in traces.items()}
    totals = {n: sum(c.values()) for n, c in counts.items()}
    per_unit = {n: totals[n] / (units or {}).get(n, 1.0) for n in totals}

    sizes = sorted(per_unit)
    slope, r_squared = growth_exponent([n - 1 for n in sizes], [per_unit[n] for n in sizes])

    return ComplexityReport(
        protocol=protocol,
        phases=phases,
        counts=counts,
        totals=totals,
        per_unit=per_unit,
        slope=slope,
        r_squared=r_squared,
    )
