from pathlib import Path
from typing import Annotated

from rich import print
from rich.console import Console
from rich.table import Table
from typer import Argument, Exit, Option, Typer

from src.core.crypto import UnknownSignatureScheme
from src.core.ledger import ChainInvariantError, CorruptChainFile, verify_chain_file
from src.core.run import CONFIG_FILE, read_run_config

cli = Typer()
console = Console()


@cli.command('verify-chain')
def verify_chain(
    path: Annotated[Path, Argument(help='Chain file written by a run')],
    scheme: Annotated[
        str | None, Option('--scheme', help='Signature scheme (read from config.json if present)')
    ] = None,
    epoch_length: Annotated[
        int | None, Option('--epoch-length', min=1, help='Blocks per epoch')
    ] = None,
):
    """Reload a chain file and re-check every ledger invariant."""
    if not path.is_file():
        print(f'[bold red]No chain file at {path}[/bold red]')
        raise Exit(2)

    # A chain inside a run directory carries its own scheme and epoch length.
    if (path.parent / CONFIG_FILE).is_file():
        config = read_run_config(path.parent)
        scheme = scheme or config.scheme
        epoch_length = epoch_length or config.microchain.epoch_length

    try:
        if epoch_length is None:
            report = verify_chain_file(path, scheme=scheme)
        else:
            report = verify_chain_file(path, scheme=scheme, epoch_length=epoch_length)
    except UnknownSignatureScheme as e:
        print(f'[bold red]{e}[/bold red]')
        raise Exit(2)
    except CorruptChainFile as e:
        print(f'[bold red]{e}[/bold red]')
        print(f'First bad height: [bold]{e.height}[/bold]')
        raise Exit(1)
    except ChainInvariantError as e:
        print(f'[bold red]{e}[/bold red]')
        raise Exit(1)

    table = Table(title='Chain verified')
    table.add_column('Blocks', style='cyan')
    table.add_column('Tip height', style='magenta')
    table.add_column('Tip hash')
    table.add_row(str(report.blocks), str(report.tip_height), report.tip_hash[:16])
    console.print(table)
