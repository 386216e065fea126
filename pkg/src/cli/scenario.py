from pathlib import Path
from typing import Annotated, Any

from rich import print
from rich.console import Console
from rich.panel import Panel
from rich.table import Table
from typer import Argument, Exit, Option, Typer

from src.core.db import get_session
from src.core.netsim import TruncatedRun
from src.core.run import (
    EXIT_SAFETY_VIOLATION,
    ConfigError,
    Protocol,
    ReplayMismatch,
    RunNotFound,
    RunService,
    SimConfig,
    execute_run,
    load_config,
    parse_config,
    replay_run,
)
from src.core.scenarios import UnknownScenario, get_scenario, list_scenarios

cli = Typer()
console = Console()

EXIT_USAGE = 2


def _scalar(value: Any) -> str:
    if isinstance(value, float):
        return f'{value:.4g}'
    return str(value)


def _config_for(path: Path | None, scenario: str | None, seed: int | None) -> SimConfig:
    if path is not None:
        return load_config(path)
    raw: dict[str, Any] = {'seed': seed or 0}
    if scenario is not None:
        protocol = get_scenario(scenario).protocol
        if protocol in Protocol:
            raw['protocol'] = protocol
    return parse_config(raw)


@cli.command()
def run(
    config: Annotated[
        Path | None, Option('--config', '-c', help='TOML run configuration')
    ] = None,
    scenario: Annotated[
        str | None, Option('--scenario', '-s', help='Scenario name (overrides the config)')
    ] = None,
    seed: Annotated[
        int | None, Option('--seed', min=0, max=2**64 - 1, help='Run seed (overrides the config)')
    ] = None,
    out: Annotated[Path | None, Option('--out', '-o', help='Run directory')] = None,
    workers: Annotated[
        int | None, Option('--workers', '-w', min=1, help='Worker processes for independent runs')
    ] = None,
):
    """Run a scenario and write its report, traces and chain."""
    try:
        sim_config = _config_for(config, scenario, seed)
        with console.status('Simulating...', spinner='dots'):
            result = execute_run(
                sim_config, scenario=scenario, seed=seed, out_dir=out, workers=workers
            )
    except (ConfigError, UnknownScenario) as e:
        print(f'[bold red]{e}[/bold red]')
        raise Exit(EXIT_USAGE)
    except TruncatedRun as e:
        print(f'[bold red]{e}[/bold red]')
        raise Exit(1)

    record = RunService(get_session).record(result)
    report = result.report

    table = Table(title=f'{report.scenario} (seed {report.seed})')
    table.add_column('Key', style='cyan')
    table.add_column('Value', style='magenta')
    for key, value in report.summary.items():
        if not isinstance(value, dict | list):
            table.add_row(key, _scalar(value))
    console.print(table)
    if report.rows:
        print(f'[dim]{len(report.rows)} rows in sweep.csv[/dim]')
    print(f'Run [bold]#{record.id}[/bold] written to [cyan]{result.out_dir}[/cyan]')

    if result.exit_code == EXIT_SAFETY_VIOLATION:
        print(
            Panel.fit(
                f'Safety violation detected.\nEvidence: {result.evidence_path}',
                style='bold red',
            )
        )
        raise Exit(EXIT_SAFETY_VIOLATION)


@cli.command('list-scenarios')
def list_scenarios_command():
    """List the registered scenarios."""
    table = Table(title='Scenarios')
    table.add_column('Name', style='cyan')
    table.add_column('Protocol', style='magenta')
    table.add_column('Description')
    for entry in list_scenarios():
        table.add_row(entry.name, entry.protocol, entry.description)
    console.print(table)


@cli.command()
def replay(
    run_dir: Annotated[Path | None, Argument(help='Stored run directory')] = None,
    run_id: Annotated[int | None, Option('--run-id', help='Recorded run to replay')] = None,
    workers: Annotated[int, Option('--workers', '-w', min=1)] = 1,
):
    """Re-run a stored run from its seed and compare traces byte for byte."""
    if run_dir is None:
        if run_id is None:
            print('[bold red]Give a run directory or --run-id.[/bold red]')
            raise Exit(EXIT_USAGE)
        try:
            run_dir = Path(RunService(get_session).get_run(run_id).output_dir)
        except RunNotFound as e:
            print(f'[bold red]{e}[/bold red]')
            raise Exit(EXIT_USAGE)

    try:
        with console.status('Replaying...', spinner='dots'):
            result = replay_run(run_dir, workers)
    except FileNotFoundError as e:
        print(f'[bold red]Not a run directory: {e.filename}[/bold red]')
        raise Exit(EXIT_USAGE)
    except ReplayMismatch as e:
        print(f'[bold red]{e}[/bold red]')
        print(f'  stored:   {e.stored}')
        print(f'  replayed: {e.replayed}')
        raise Exit(1)

    print(
        f'[green]Replay identical: {len(result.traces)} traces, {result.lines} lines.[/green]'
    )
