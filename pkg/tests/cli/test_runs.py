from pathlib import Path

import pytest
from sqlmodel import Session
from typer.testing import CliRunner

from src.core.models import RunRecord
from src.core.run import RunService, execute_run
from src.main import app

runner = CliRunner()


@pytest.fixture(name="recorded_run")
def recorded_run_fixture(session: Session, tmp_path, quick_config) -> RunRecord:
    result = execute_run(quick_config, out_dir=tmp_path / 'run')
    return RunService(lambda: iter([session])).record(result)


def test_list_runs_empty():
    """Test listing before anything was recorded."""
    result = runner.invoke(app, ['runs', 'list'])
    assert result.exit_code == 0
    assert 'No runs recorded yet' in result.stdout


def test_list_runs(recorded_run: RunRecord):
    """Test that a recorded run is listed."""
    result = runner.invoke(app, ['runs', 'list'])
    assert result.exit_code == 0
    assert 'microchain' in result.stdout
    assert str(recorded_run.id) in result.stdout


def test_list_runs_filtered(recorded_run: RunRecord):  # noqa: ARG001
    """Test the scenario filter."""
    result = runner.invoke(app, ['runs', 'list', '--scenario', 'pbft'])
    assert result.exit_code == 0
    assert 'No runs recorded yet' in result.stdout


def test_show_run(recorded_run: RunRecord):
    """Test that show prints the digest and the artifacts."""
    result = runner.invoke(app, ['runs', 'show', str(recorded_run.id)])
    assert result.exit_code == 0
    assert recorded_run.trace_digest in result.stdout
    assert 'TRACE' in result.stdout
    assert 'CHAIN' in result.stdout


def test_show_unknown_run():
    """Test show with an unknown id."""
    result = runner.invoke(app, ['runs', 'show', '42'])
    assert result.exit_code == 1
    assert 'not found' in result.stdout


def test_delete_run(session: Session, recorded_run: RunRecord):
    """Test that delete forgets the run but keeps its directory."""
    run_id = recorded_run.id
    output_dir = recorded_run.output_dir

    result = runner.invoke(app, ['runs', 'delete', str(run_id), '--yes'])

    assert result.exit_code == 0
    assert session.get(RunRecord, run_id) is None
    assert Path(output_dir).is_dir()


def test_delete_run_declined(session: Session, recorded_run: RunRecord):
    """Test that answering no keeps the run."""
    result = runner.invoke(app, ['runs', 'delete', str(recorded_run.id)], input='n\n')
    assert result.exit_code == 0
    assert 'Kept' in result.stdout
    assert session.get(RunRecord, recorded_run.id) is not None
