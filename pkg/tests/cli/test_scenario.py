from sqlmodel import Session, select
from typer.testing import CliRunner

from src.core.models import RunRecord
from src.core.run import TRACE_DIR
from src.main import app

runner = CliRunner()

QUICK = """
seed = 7
scheme = "sim-hash"

[microchain]
epochs = 1
"""

MAJORITY_EQUIVOCATION = """
scenario = "byzantine-safety"
seed = 3
scheme = "sim-hash"

[[nodes]]

[[nodes]]
equivocating = true

[[nodes]]
equivocating = true

[[nodes]]
equivocating = true

[microchain]
epochs = 1
"""


def flat(text: str) -> str:
    return ' '.join(text.split())


def write_config(tmp_path, text: str):
    path = tmp_path / 'run.toml'
    path.write_text(text, encoding='utf-8')
    return path


# List


def test_list_scenarios():
    """Test that every registered scenario is listed."""
    result = runner.invoke(app, ['list-scenarios'])
    assert result.exit_code == 0
    assert 'committee-size' in result.stdout
    assert 'attacker-overtake' in result.stdout
    assert 'byzantine-safety' in result.stdout


# Run


def test_run_from_config(session: Session, tmp_path):
    """Test a run from a TOML file writes its directory and registers the run."""
    config = write_config(tmp_path, QUICK)
    out = tmp_path / 'out'

    result = runner.invoke(app, ['run', '--config', str(config), '--out', str(out)])

    assert result.exit_code == 0
    assert 'finalized_epochs' in result.stdout
    assert (out / 'summary.json').is_file()
    record = session.exec(select(RunRecord)).one()
    assert record.scenario == 'microchain'
    assert record.seed == '7'
    assert record.exit_code == 0


def test_run_scenario_without_config(session: Session, tmp_path):
    """Test that --scenario alone picks the scenario's protocol and defaults."""
    result = runner.invoke(
        app, ['run', '--scenario', 'om', '--seed', '5', '--out', str(tmp_path / 'om')]
    )

    assert result.exit_code == 0
    assert 'agreed' in result.stdout
    record = session.exec(select(RunRecord)).one()
    assert record.protocol == 'om'
    assert record.seed == '5'


def test_run_unknown_scenario():
    """Test that an unknown scenario exits with code 2."""
    result = runner.invoke(app, ['run', '--scenario', 'comittee-size'])
    assert result.exit_code == 2
    assert 'Unknown scenario' in flat(result.stdout)


def test_run_invalid_config(tmp_path):
    """Test that PBFT with three replicas and f=1 is rejected before running."""
    config = write_config(
        tmp_path, 'protocol = "pbft"\nseed = 1\n[[nodes]]\n[[nodes]]\n[[nodes]]\n'
    )

    result = runner.invoke(app, ['run', '--config', str(config)])

    assert result.exit_code == 2
    assert 'needs at least 4 replicas' in flat(result.stdout)


def test_run_missing_config(tmp_path):
    """Test that a missing config file exits with code 2."""
    result = runner.invoke(app, ['run', '--config', str(tmp_path / 'absent.toml')])
    assert result.exit_code == 2
    assert 'file not found' in flat(result.stdout)


def test_run_safety_violation_exits_3(session: Session, tmp_path):
    """Test that conflicting finality exits with code 3 and names the evidence."""
    config = write_config(tmp_path, MAJORITY_EQUIVOCATION)
    out = tmp_path / 'out'

    result = runner.invoke(app, ['run', '-c', str(config), '-o', str(out)])

    assert result.exit_code == 3
    assert 'Safety violation' in flat(result.stdout)
    assert (out / 'evidence.json').is_file()
    record = session.exec(select(RunRecord)).one()
    assert record.safety_violation
    assert record.exit_code == 3


# Replay


def test_replay_run_dir(tmp_path):
    """Test that replaying a stored run reproduces its traces."""
    config = write_config(tmp_path, QUICK)
    out = tmp_path / 'out'
    runner.invoke(app, ['run', '-c', str(config), '-o', str(out)])

    result = runner.invoke(app, ['replay', str(out)])

    assert result.exit_code == 0
    assert 'Replay identical' in flat(result.stdout)


def test_replay_by_run_id(session: Session, tmp_path):
    """Test replay of a recorded run by its registry id."""
    config = write_config(tmp_path, QUICK)
    runner.invoke(app, ['run', '-c', str(config), '-o', str(tmp_path / 'out')])
    record = session.exec(select(RunRecord)).one()

    result = runner.invoke(app, ['replay', '--run-id', str(record.id)])

    assert result.exit_code == 0
    assert 'Replay identical' in flat(result.stdout)


def test_replay_detects_tampered_trace(tmp_path):
    """Test that an edited trace line fails replay with code 1."""
    config = write_config(tmp_path, QUICK)
    out = tmp_path / 'out'
    runner.invoke(app, ['run', '-c', str(config), '-o', str(out)])
    trace_path = out / TRACE_DIR / 'microchain-7.jsonl'
    lines = trace_path.read_text().splitlines()
    lines[0] += ' '
    trace_path.write_text('\n'.join(lines) + '\n')

    result = runner.invoke(app, ['replay', str(out)])

    assert result.exit_code == 1
    assert 'diverges at line 1' in flat(result.stdout)


def test_replay_needs_a_target():
    """Test replay without a directory or run id."""
    result = runner.invoke(app, ['replay'])
    assert result.exit_code == 2


def test_replay_unknown_run_id():
    """Test replay of a run id that was never recorded."""
    result = runner.invoke(app, ['replay', '--run-id', '999'])
    assert result.exit_code == 2
    assert 'not found' in result.stdout
