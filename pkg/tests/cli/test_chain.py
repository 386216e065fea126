from typer.testing import CliRunner

from src.core.ledger import genesis_block
from src.core.ledger.encoding import u32
from src.core.run import CHAIN_FILE, execute_run
from src.main import app

runner = CliRunner()


def flat(text: str) -> str:
    return ' '.join(text.split())


def test_verify_chain_of_run(tmp_path, quick_config):
    """Test that a chain written by a run verifies with its stored settings."""
    result = execute_run(quick_config, out_dir=tmp_path / 'run')

    cli_result = runner.invoke(app, ['verify-chain', str(tmp_path / 'run' / CHAIN_FILE)])

    assert cli_result.exit_code == 0
    assert 'Chain verified' in cli_result.stdout
    assert str(result.report.chain[-1].height) in cli_result.stdout


def test_verify_chain_reports_corrupt_height(tmp_path, quick_config):
    """Test that a flipped byte in record 2 is reported at height 2."""
    execute_run(quick_config, out_dir=tmp_path / 'run')
    path = tmp_path / 'run' / CHAIN_FILE
    data = bytearray(path.read_bytes())
    genesis_len = 4 + len(genesis_block().canonical_bytes())
    first_len = int.from_bytes(data[genesis_len : genesis_len + 4], 'big')
    second = genesis_len + 4 + first_len
    # Last byte of the second non-genesis record sits inside its signature.
    second_len = int.from_bytes(data[second : second + 4], 'big')
    data[second + 4 + second_len - 1] ^= 0xFF
    path.write_bytes(bytes(data))

    result = runner.invoke(app, ['verify-chain', str(path)])

    assert result.exit_code == 1
    assert 'First bad height: 2' in flat(result.stdout)


def test_verify_chain_missing_file(tmp_path):
    """Test a path with no chain file."""
    result = runner.invoke(app, ['verify-chain', str(tmp_path / 'chain.bin')])
    assert result.exit_code == 2


def test_verify_chain_truncated_record(tmp_path):
    """Test a length prefix that runs past the end of the file."""
    path = tmp_path / 'chain.bin'
    data = genesis_block().canonical_bytes()
    path.write_bytes(u32(len(data)) + data + u32(500) + b'\x00' * 10)

    result = runner.invoke(app, ['verify-chain', str(path), '--scheme', 'sim-hash'])

    assert result.exit_code == 1
    assert 'record runs past end of file' in flat(result.stdout)
    assert 'First bad height: 1' in flat(result.stdout)
