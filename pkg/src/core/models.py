from datetime import datetime
from enum import Enum

from sqlmodel import Field, SQLModel


class ArtifactKind(str, Enum):
    """Files a run directory can hold."""

    CONFIG = 'CONFIG'
    SUMMARY = 'SUMMARY'
    SWEEP = 'SWEEP'
    TRACE = 'TRACE'
    CHAIN = 'CHAIN'
    EVIDENCE = 'EVIDENCE'


class RunRecord(SQLModel, table=True):
    id: int | None = Field(default=None, primary_key=True)
    scenario: str = Field(index=True)
    protocol: str
    # u64 seeds do not fit SQLite's signed INTEGER
    seed: str
    output_dir: str
    trace_digest: str
    exit_code: int = Field(default=0)
    safety_violation: bool = Field(default=False, index=True)
    created_at: datetime = Field(default_factory=datetime.now)


class RunArtifact(SQLModel, table=True):
    id: int | None = Field(default=None, primary_key=True)
    run_id: int = Field(foreign_key='runrecord.id', index=True)
    kind: ArtifactKind
    path: str
