"""
Run directories.

    config.json      validated configuration, scenario and seed resolved
    summary.json     scenario, protocol, seed, summary keys, trace digests
    sweep.csv        one row per sweep point or seeded run (when any)
    traces/*.jsonl   raw traces
    chain.bin        finalized chain (Microchain scenarios)
    evidence.json    conflict evidence (only after a safety breach)

Nothing in a run directory depends on wall-clock time, so rerunning the same
configuration rewrites identical files.
"""

import csv
import json
from pathlib import Path
from typing import Any

from pydantic_core import to_jsonable_python

from src.core.config import app_settings
from src.core.ledger import ChainStore
from src.core.models import ArtifactKind
from src.core.run.config import SimConfig
from src.core.scenarios import ScenarioReport

CONFIG_FILE = 'config.json'
SUMMARY_FILE = 'summary.json'
SWEEP_FILE = 'sweep.csv'
TRACE_DIR = 'traces'
CHAIN_FILE = 'chain.bin'
EVIDENCE_FILE = 'evidence.json'


def to_json(value: Any) -> str:
    return json.dumps(to_jsonable_python(value, bytes_mode='hex'), indent=2, sort_keys=True) + '\n'


def write_rows(path: Path, rows: list[dict[str, Any]]) -> None:
    """CSV with the union of row keys as header, in first-seen order."""
    header: dict[str, None] = {}
    for row in rows:
        header.update(dict.fromkeys(row))
    with path.open('w', newline='', encoding='utf-8') as handle:
        writer = csv.DictWriter(handle, fieldnames=list(header), restval='')
        writer.writeheader()
        writer.writerows(rows)


def summary_document(config: SimConfig, report: ScenarioReport) -> dict[str, Any]:
    return {
        'scenario': report.scenario,
        'protocol': report.protocol,
        'seed': report.seed,
        'runs': config.runs,
        'version': app_settings.PROJECT_VERSION,
        'safety_violation': report.safety_violation,
        'summary': report.summary,
        'traces': report.trace_digests,
        'evidence': EVIDENCE_FILE if report.safety_violation else None,
    }


def write_run_dir(
    out_dir: Path, config: SimConfig, report: ScenarioReport
) -> dict[ArtifactKind, list[Path]]:
    """
    Write every artifact of one run into `out_dir`.

    Returns:
        The written paths grouped by kind.
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    written: dict[ArtifactKind, list[Path]] = {}

    def put(kind: ArtifactKind, path: Path) -> Path:
        written.setdefault(kind, []).append(path)
        return path

    put(ArtifactKind.CONFIG, out_dir / CONFIG_FILE).write_text(
        config.model_dump_json(indent=2) + '\n', encoding='utf-8'
    )
    put(ArtifactKind.SUMMARY, out_dir / SUMMARY_FILE).write_text(
        to_json(summary_document(config, report)), encoding='utf-8'
    )
    if report.rows:
        write_rows(put(ArtifactKind.SWEEP, out_dir / SWEEP_FILE), report.rows)
    for name, trace in sorted(report.traces.items()):
        trace.write(put(ArtifactKind.TRACE, out_dir / TRACE_DIR / f'{name}.jsonl'))
    if report.chain:
        ChainStore(put(ArtifactKind.CHAIN, out_dir / CHAIN_FILE)).write_chain(report.chain)
    if report.evidence is not None:
        put(ArtifactKind.EVIDENCE, out_dir / EVIDENCE_FILE).write_text(
            to_json(report.evidence), encoding='utf-8'
        )
    return written


def read_run_config(run_dir: Path) -> SimConfig:
    return SimConfig.model_validate_json((run_dir / CONFIG_FILE).read_text(encoding='utf-8'))
