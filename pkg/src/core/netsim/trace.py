"""
Run traces.

Exported as JSON Lines, one record per event, keys in a fixed order:
seq, time, kind, from, to, tag, msg, size, hash, label, data. Two runs with
identical inputs produce byte-identical exports.
"""

import json
from collections import Counter
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, Field

from src.core.crypto import hash_data


class TraceRecord(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    seq: int
    time: float
    kind: str
    sender: int | None = Field(default=None, alias='from')
    recipient: int | None = Field(default=None, alias='to')
    tag: int | None = None
    msg: str | None = None
    size: int | None = None
    hash: str | None = None
    label: str | None = None
    data: dict[str, Any] | None = None

    def to_json(self) -> str:
        return json.dumps(
            self.model_dump(by_alias=True, exclude_none=True),
            separators=(',', ':'),
            sort_keys=False,
        )


class Trace:
    """Ordered records of one run plus exact per-message-type send counters."""

    def __init__(self) -> None:
        self.records: list[TraceRecord] = []
        self.sent: Counter[str] = Counter()
        self.delivered: Counter[str] = Counter()
        self.dropped: Counter[str] = Counter()
        self.end_time: float = 0.0
        self.halted: str | None = None
        self.evidence: dict[str, Any] | None = None
        self.snapshots: dict[int, dict[str, Any]] = {}

    def __len__(self) -> int:
        return len(self.records)

    def add(self, **fields: Any) -> TraceRecord:
        record = TraceRecord(seq=len(self.records), **fields)
        self.records.append(record)
        self.end_time = max(self.end_time, record.time)
        return record

    def marks(self, label: str | None = None) -> list[TraceRecord]:
        return [
            r for r in self.records if r.kind == 'mark' and (label is None or r.label == label)
        ]

    def of_kind(self, kind: str) -> list[TraceRecord]:
        return [r for r in self.records if r.kind == kind]

    @property
    def total_sent(self) -> int:
        return sum(self.sent.values())

    def to_jsonl(self) -> str:
        return ''.join(record.to_json() + '\n' for record in self.records)

    def digest(self) -> str:
        return hash_data(self.to_jsonl().encode('utf-8')).hex()

    def write(self, path: Path) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_jsonl(), encoding='utf-8')

    @classmethod
    def read(cls, path: Path) -> 'Trace':
        """Rebuild a trace from its JSONL export; counters are recomputed."""
        trace = cls()
        for line in path.read_text(encoding='utf-8').splitlines():
            record = TraceRecord.model_validate(json.loads(line))
            trace.records.append(record)
            trace.end_time = max(trace.end_time, record.time)
            if record.msg is not None and record.kind in ('send', 'deliver', 'drop'):
                counter = {'send': trace.sent, 'deliver': trace.delivered, 'drop': trace.dropped}
                counter[record.kind][record.msg] += 1
            if record.kind == 'halt':
                trace.halted = record.label
                trace.evidence = record.data
        return trace
