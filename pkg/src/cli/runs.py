from typing import Annotated

from rich import print
from rich.console import Console
from rich.prompt import Confirm
from rich.table import Table
from typer import Argument, Context, Exit, Option, Typer

from src.core.db import get_session
from src.core.run import RunNotFound, RunService

cli = Typer()
console = Console()


class RunsContext:
    def __init__(self):
        self.service = RunService(get_session)


@cli.callback()
def main(ctx: Context):
    ctx.obj = RunsContext()


@cli.command('list')
def list_runs(
    ctx: Context,
    scenario: Annotated[str | None, Option('--scenario', '-s', help='Only this scenario')] = None,
    limit: Annotated[int, Option('--limit', '-n', min=1)] = 20,
):
    """List recorded runs, newest first."""
    runs = ctx.obj.service.list_runs(scenario, limit)
    if not runs:
        print('[yellow]No runs recorded yet.[/yellow]')
        return

    table = Table(title='Runs')
    table.add_column('ID', style='cyan')
    table.add_column('Scenario', style='magenta')
    table.add_column('Seed')
    table.add_column('Exit')
    table.add_column('Directory', overflow='fold')
    for record in runs:
        exit_style = 'red' if record.safety_violation else 'green'
        table.add_row(
            str(record.id),
            record.scenario,
            record.seed,
            f'[{exit_style}]{record.exit_code}[/{exit_style}]',
            record.output_dir,
        )
    console.print(table)


@cli.command()
def show(ctx: Context, run_id: Annotated[int, Argument(help='Run ID')]):
    """Show one run and the files it wrote."""
    service: RunService = ctx.obj.service
    try:
        record = service.get_run(run_id)
        artifacts = service.get_artifacts(run_id)
    except RunNotFound as e:
        print(f'[bold red]{e}[/bold red]')
        raise Exit(1)

    print(f'[bold]Run #{record.id}[/bold] {record.scenario} ({record.protocol})')
    print(f'Seed: {record.seed}')
    print(f'Exit code: {record.exit_code}')
    print(f'Trace digest: {record.trace_digest}')
    print(f'Recorded: {record.created_at:%Y-%m-%d %H:%M}')
    table = Table(title='Artifacts')
    table.add_column('Kind', style='cyan')
    table.add_column('Path', overflow='fold')
    for artifact in artifacts:
        table.add_row(artifact.kind.value, artifact.path)
    console.print(table)


@cli.command()
def delete(
    ctx: Context,
    run_id: Annotated[int, Argument(help='Run ID')],
    yes: Annotated[bool, Option('--yes', '-y', help='Skip confirmation')] = False,
):
    """Forget a run. Its directory stays on disk."""
    if not yes and not Confirm.ask(f'Forget run #{run_id}?'):
        print('[yellow]Kept.[/yellow]')
        return
    try:
        ctx.obj.service.delete_run(run_id)
    except RunNotFound as e:
        print(f'[bold red]{e}[/bold red]')
        raise Exit(1)
    print(f'[green]Run #{run_id} forgotten.[/green]')
