"""What a scenario hands back to the run layer for persistence."""

from typing import Any

from pydantic import BaseModel, ConfigDict, Field

from src.core.ledger import Block
from src.core.netsim import Trace


class ScenarioReport(BaseModel):
    """
    Summary keys, an optional sweep table, raw traces, and for Microchain
    scenarios the finalized chain.

    `evidence` is set only when a run breached safety.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    scenario: str
    protocol: str
    seed: int
    summary: dict[str, Any]
    rows: list[dict[str, Any]] = Field(default_factory=list)
    traces: dict[str, Trace] = Field(default_factory=dict)
    chain: tuple[Block, ...] = ()
    evidence: dict[str, Any] | None = None

    @property
    def safety_violation(self) -> bool:
        return self.evidence is not None

    @property
    def trace_digests(self) -> dict[str, str]:
        return {name: trace.digest() for name, trace in sorted(self.traces.items())}
