"""Domain exceptions for run configuration and the run registry."""

from pathlib import Path


class RunError(Exception):
    """Base exception for run errors."""

    pass


class ConfigError(RunError):
    """Raised when a run configuration cannot be read or fails validation."""

    def __init__(self, source: Path | None, issues: list[tuple[str, str]]) -> None:
        self.source = source
        self.issues = issues
        where = f'{source}: ' if source is not None else ''
        lines = '; '.join(f'{key or "(config)"}: {message}' for key, message in issues)
        super().__init__(f'{where}{lines}')


class RunNotFound(RunError):
    """Raised when a recorded run cannot be found."""

    def __init__(self, run_id: int) -> None:
        self.run_id = run_id
        super().__init__(f'Run with ID {run_id} not found')


class ReplayMismatch(RunError):
    """Raised when a replayed run does not reproduce its stored trace."""

    def __init__(self, trace: str, line: int, stored: str | None, replayed: str | None) -> None:
        self.trace = trace
        self.line = line
        self.stored = stored
        self.replayed = replayed
        super().__init__(f'Trace {trace} diverges at line {line}')
