from typing import Annotated

from rich import print
from typer import Exit, Option, Typer

from src.cli.chain import verify_chain
from src.cli.runs import cli as runs_cli
from src.cli.scenario import list_scenarios_command, replay, run
from src.core.config import app_settings
from src.core.db import init_db
from src.core.logs import configure_logging

app = Typer(
    no_args_is_help=True,
    rich_markup_mode='rich',
    suggest_commands=True,
    help=f'{app_settings.PROJECT_NAME} - {app_settings.PROJECT_DESCRIPTION}',
    epilog=f'Version: {app_settings.PROJECT_VERSION}',
)
app.command('run')(run)
app.command('list-scenarios')(list_scenarios_command)
app.command('replay')(replay)
app.command('verify-chain')(verify_chain)
app.add_typer(runs_cli, name='runs', help='Recorded runs')


def version_callback(value: bool) -> bool:
    if value:
        print(f'[bold green]v{app_settings.PROJECT_VERSION}[/bold green]')
        raise Exit()
    return value


@app.callback()
def main(
    version: Annotated[  # noqa: ARG001
        bool | None,
        Option(
            '--version',
            '-V',
            help='Display the program version',
            is_eager=True,
            callback=version_callback,
        ),
    ] = None,
    log_level: Annotated[
        str | None, Option('--log-level', '-l', help='DEBUG, INFO, WARNING or ERROR')
    ] = None,
):
    configure_logging(log_level.upper() if log_level else None)
    init_db()


if __name__ == '__main__':
    app()
