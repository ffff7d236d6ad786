import logging

import click
from rich.console import Console
from rich.logging import RichHandler

from artifacts import write_record
from commands.history import run_history
from commands.leak import run_leak
from commands.nogo import run_nogo
from commands.onto import run_onto
from commands.pbr import run_pbr
from commands.protective import run_protective
from commands.scan import run_scan
from commands.steer import run_steer
from config import ALICE_BASES, FORMATS, HISTORY_DB, MODES, OBSERVABLES, SCENARIOS, load_config
from database import init_db, log_history, log_run
from errors import LabError

log = logging.getLogger(__name__)

RUNNERS = {
    "protective": run_protective,
    "leak": run_leak,
    "scan": run_scan,
    "pbr": run_pbr,
    "steer": run_steer,
    "onto": run_onto,
    "nogo": run_nogo,
}


def setup_logging(verbose):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def experiment_options(f):
    options = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False), help="JSON RunConfig file."),
        click.option("--seed", type=int),
        click.option("--trials", type=int),
        click.option("--n", type=int, help="Protection steps."),
        click.option("--g", type=float, help="Coupling strength per step."),
        click.option("--grid-points", type=int),
        click.option("--width", type=float, help="Pointer width."),
        click.option("--q", type=float, help="Shared-lambda weight."),
        click.option("--theta", type=float),
        click.option("--momentum", type=float),
        click.option("--observable", type=click.Choice(OBSERVABLES)),
        click.option("--mode", type=click.Choice(MODES)),
        click.option("--resolution", type=int),
        click.option("--alice-basis", type=click.Choice(ALICE_BASES)),
        click.option("--device-dim", type=int),
        click.option("--mixture", type=float, nargs=4),
        click.option("--scenario", type=click.Choice(SCENARIOS)),
        click.option("--output", type=click.Path(file_okay=False)),
        click.option("--fmt", type=click.Choice(FORMATS)),
        click.option("--dump-joint", is_flag=True, default=None),
        click.option("--model", type=click.Path(dir_okay=False)),
    ]
    for option in reversed(options):
        f = option(f)
    return f


@click.group()
@click.option("--verbose", is_flag=True, help="Debug logging.")
@click.option("--history-db", default=None, help=f"Run ledger (default {HISTORY_DB}).")
@click.option("--no-history", is_flag=True, help="Do not record the run.")
@click.pass_context
def cli(ctx, verbose, history_db, no_history):
    """Quantum measurement lab: seeded experiment runners."""
    setup_logging(verbose)
    ctx.obj = {"history_db": history_db, "record": not no_history}


def execute(ctx, subcommand, config_path=None, **options):
    history_db = ctx.obj["history_db"]
    config = None
    written = []
    try:
        config = load_config(subcommand, config_path, history_db=history_db, **options)
        record = RUNNERS[subcommand](config)
        written = write_record(record, config.output_dir, config.fmt)
        status = 0
    except LabError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        status = exc.exit_code
    if ctx.obj["record"]:
        database = config.history_db if config else history_db or HISTORY_DB
        init_db(database)
        run_id = log_run(
            subcommand,
            config.seed if config else options.get("seed"),
            config.echo() if config else {},
            config.output_dir if config else "",
            status,
            database,
        )
        for path in written:
            log_history(run_id, "write", path.name, database)
        if status:
            log_history(run_id, "fail", f"exit status {status}", database)
    ctx.exit(status)


def _experiment(name, doc):
    @cli.command(name=name, help=doc)
    @experiment_options
    @click.pass_context
    def command(ctx, **options):
        execute(ctx, name, **options)

    return command


protective = _experiment("protective", "Protective measurement of a qubit plus protective tomography.")
leak = _experiment("leak", "Protection onto |0> applied to a system prepared elsewhere.")
scan = _experiment("scan", "Direct wavefunction scan of a Gaussian by weak values.")
pbr = _experiment("pbr", "Antidistinguishing measurement on |0>,|+> product pairs.")
steer = _experiment("steer", "EPR steering of Bob's qubit by Alice's choice of basis.")
onto = _experiment("onto", "Minimal forbidden-outcome cost of shared physical states.")
nogo = _experiment("nogo", "Overlap preservation under random device unitaries.")


@cli.command()
@click.option("--subcommand", "filter_by", default=None, help="Only runs of this subcommand.")
@click.option("--export", type=click.Path(dir_okay=False), help="Write the listing to CSV.")
@click.option("--run", "run_id", type=int, default=None, help="Show the events of one run instead.")
@click.pass_context
def history(ctx, filter_by, export, run_id):
    """List recorded runs, or the events of one run."""
    try:
        config = load_config("history", history_db=ctx.obj["history_db"])
    except LabError as exc:
        log.error("%s", exc)
        ctx.exit(exc.exit_code)
    run_history(config, filter_by, export, run_id)


if __name__ == "__main__":
    cli()
