"""Run execution, replay and the run registry."""

import logging
from collections.abc import Callable, Generator
from pathlib import Path

from pydantic import BaseModel, ConfigDict
from sqlmodel import Session, select
from sqlmodel.sql.expression import col

from src.core.config import app_settings
from src.core.crypto import hash_data
from src.core.models import ArtifactKind, RunArtifact, RunRecord
from src.core.netsim import Trace
from src.core.run.artifacts import TRACE_DIR, read_run_config, write_run_dir
from src.core.run.config import SimConfig
from src.core.run.errors import ReplayMismatch, RunNotFound
from src.core.scenarios import ScenarioReport, get_scenario

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_SAFETY_VIOLATION = 3


class RunResult(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    config: SimConfig
    report: ScenarioReport
    out_dir: Path
    artifacts: dict[ArtifactKind, list[Path]]

    @property
    def exit_code(self) -> int:
        return EXIT_SAFETY_VIOLATION if self.report.safety_violation else EXIT_OK

    @property
    def evidence_path(self) -> Path | None:
        paths = self.artifacts.get(ArtifactKind.EVIDENCE)
        return paths[0] if paths else None

    @property
    def trace_digest(self) -> str:
        """Digest over the digests of every trace, in name order."""
        return hash_data(''.join(self.report.trace_digests.values()).encode()).hex()


def resolve_config(
    config: SimConfig, *, scenario: str | None = None, seed: int | None = None
) -> SimConfig:
    """Apply command-line overrides and pin the scenario name into the config."""
    update: dict[str, object] = {'scenario': scenario or config.scenario_name}
    if seed is not None:
        update['seed'] = seed
    return config.model_copy(update=update)


def default_out_dir(config: SimConfig) -> Path:
    base = config.output_dir or Path(app_settings.OUTPUT_DIR)
    return base / f'{config.scenario_name}-{config.seed}'


def run_scenario(config: SimConfig, workers: int = 1) -> ScenarioReport:
    """
    Raises:
        UnknownScenario: If the configured scenario is not registered.
    """
    entry = get_scenario(config.scenario_name)
    logger.info('running %s (seed %d, %d workers)', entry.name, config.seed, workers)
    return entry.runner(config, workers)


def execute_run(
    config: SimConfig,
    *,
    scenario: str | None = None,
    seed: int | None = None,
    out_dir: Path | None = None,
    workers: int | None = None,
) -> RunResult:
    """
    Run a scenario and write its run directory.

    Args:
        config: Validated configuration.
        scenario: Scenario name overriding the configuration.
        seed: Seed overriding the configuration.
        out_dir: Run directory; `<output_dir>/<scenario>-<seed>` by default.
        workers: Worker processes for independent runs.

    Returns:
        The report, the directory and the files written.

    Raises:
        UnknownScenario: If the scenario is not registered.
    """
    config = resolve_config(config, scenario=scenario, seed=seed)
    workers = workers or config.workers or app_settings.MAX_WORKERS
    report = run_scenario(config, workers)
    out_dir = out_dir or default_out_dir(config)
    artifacts = write_run_dir(out_dir, config, report)
    if report.safety_violation:
        logger.warning('%s breached safety; evidence in %s', report.scenario, out_dir)
    return RunResult(config=config, report=report, out_dir=out_dir, artifacts=artifacts)


class ReplayResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    run_dir: Path
    traces: tuple[str, ...]
    lines: int


def replay_run(run_dir: Path, workers: int = 1) -> ReplayResult:
    """
    Re-run a stored run from its config snapshot and compare every stored trace.

    Raises:
        ReplayMismatch: Naming the first trace and line that differ.
        UnknownScenario: If the stored scenario is no longer registered.
    """
    config = read_run_config(run_dir)
    report = run_scenario(config, workers)
    compared, lines = [], 0
    for stored_path in sorted((run_dir / TRACE_DIR).glob('*.jsonl')):
        name = stored_path.stem
        stored = stored_path.read_text(encoding='utf-8').splitlines()
        replayed_trace = report.traces.get(name, Trace())
        replayed = replayed_trace.to_jsonl().splitlines()
        for line, (a, b) in enumerate(zip(stored, replayed, strict=False), start=1):
            if a != b:
                raise ReplayMismatch(name, line, a, b)
        if len(stored) != len(replayed):
            line = min(len(stored), len(replayed)) + 1
            raise ReplayMismatch(
                name,
                line,
                stored[line - 1] if line <= len(stored) else None,
                replayed[line - 1] if line <= len(replayed) else None,
            )
        compared.append(name)
        lines += len(stored)
    logger.info('replayed %s: %d traces, %d lines identical', run_dir, len(compared), lines)
    return ReplayResult(run_dir=run_dir, traces=tuple(compared), lines=lines)


class RunService:
    """Service recording runs and their artifacts in the run registry."""

    def __init__(self, session_factory: Callable[[], Generator[Session]]) -> None:
        """
        Initialize the run service.

        Args:
            session_factory: A callable that returns a generator yielding a Session.
        """
        self._session_factory = session_factory

    def _get_session(self) -> Session:
        return next(self._session_factory())

    def record(self, result: RunResult) -> RunRecord:
        """Store a finished run and every file it wrote."""
        session = self._get_session()
        record = RunRecord(
            scenario=result.report.scenario,
            protocol=result.report.protocol,
            seed=str(result.config.seed),
            output_dir=str(result.out_dir),
            trace_digest=result.trace_digest,
            exit_code=result.exit_code,
            safety_violation=result.report.safety_violation,
        )
        session.add(record)
        session.flush()
        for kind, paths in result.artifacts.items():
            for path in paths:
                session.add(RunArtifact(run_id=record.id, kind=kind, path=str(path)))
        session.commit()
        session.refresh(record)
        return record

    def list_runs(self, scenario: str | None = None, limit: int = 20) -> list[RunRecord]:
        """Most recent runs first, optionally for one scenario."""
        session = self._get_session()
        statement = select(RunRecord)
        if scenario is not None:
            statement = statement.where(RunRecord.scenario == scenario)
        statement = statement.order_by(col(RunRecord.id).desc()).limit(limit)
        return list(session.exec(statement).all())

    def get_run(self, run_id: int) -> RunRecord:
        """
        Raises:
            RunNotFound: If no run has this id.
        """
        record = self._get_session().get(RunRecord, run_id)
        if record is None:
            raise RunNotFound(run_id)
        return record

    def get_artifacts(self, run_id: int) -> list[RunArtifact]:
        self.get_run(run_id)
        statement = (
            select(RunArtifact).where(RunArtifact.run_id == run_id).order_by(col(RunArtifact.id))
        )
        return list(self._get_session().exec(statement).all())

    def delete_run(self, run_id: int) -> None:
        """Forget a run; its directory is left on disk."""
        session = self._get_session()
        record = session.get(RunRecord, run_id)
        if record is None:
            raise RunNotFound(run_id)
        for artifact in session.exec(select(RunArtifact).where(RunArtifact.run_id == run_id)):
            session.delete(artifact)
        session.delete(record)
        session.commit()
