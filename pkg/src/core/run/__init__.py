"""Run configuration, execution, replay and the run registry."""

from src.core.run.artifacts import (
    CHAIN_FILE,
    CONFIG_FILE,
    EVIDENCE_FILE,
    SUMMARY_FILE,
    SWEEP_FILE,
    TRACE_DIR,
    read_run_config,
    write_run_dir,
)
from src.core.run.config import (
    DEFAULT_SCENARIO,
    BftSettings,
    NakamotoSettings,
    NodeConfig,
    Protocol,
    SimConfig,
    SweepSettings,
    load_config,
    parse_config,
)
from src.core.run.errors import ConfigError, ReplayMismatch, RunError, RunNotFound
from src.core.run.service import (
    EXIT_OK,
    EXIT_SAFETY_VIOLATION,
    ReplayResult,
    RunResult,
    RunService,
    default_out_dir,
    execute_run,
    replay_run,
    resolve_config,
    run_scenario,
)

__all__ = [
    'Protocol',
    'DEFAULT_SCENARIO',
    'NodeConfig',
    'BftSettings',
    'NakamotoSettings',
    'SweepSettings',
    'SimConfig',
    'load_config',
    'parse_config',
    'CONFIG_FILE',
    'SUMMARY_FILE',
    'SWEEP_FILE',
    'TRACE_DIR',
    'CHAIN_FILE',
    'EVIDENCE_FILE',
    'read_run_config',
    'write_run_dir',
    'EXIT_OK',
    'EXIT_SAFETY_VIOLATION',
    'RunResult',
    'ReplayResult',
    'RunService',
    'default_out_dir',
    'execute_run',
    'replay_run',
    'resolve_config',
    'run_scenario',
    'RunError',
    'ConfigError',
    'RunNotFound',
    'ReplayMismatch',
]
