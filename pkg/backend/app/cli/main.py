"""eos-lab command line: figure reproduction, tables, post-states, fidelity sweeps and oracle checks."""
import json
import logging
import sys
from pathlib import Path
from typing import Callable, Optional

import click
from dotenv import load_dotenv

from .. import __version__
from ..errors import EosLabError, NumericalWindowError
from ..pipeline.config import RunConfig, load_config, resolved
from ..pipeline.logging_setup import setup_logging
from ..pipeline.storage import RunStorage
from . import tasks

logger = logging.getLogger(__name__)


def _apply_overrides(config: RunConfig, seed: Optional[int], samples: Optional[int], grid: Optional[int]) -> RunConfig:
    updates = {}
    if seed is not None:
        updates["seed"] = seed
    if samples is not None:
        updates["samples"] = samples
    if grid is not None:
        updates["grid"] = config.grid.model_copy(update={"points": grid})
    return config.model_copy(update=updates)


def run_options(func: Callable) -> Callable:
    """Shared per-command options."""
    options = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False, path_type=Path), default=None,
                     help="YAML run configuration."),
        click.option("--out", "out_dir", type=click.Path(file_okay=False, path_type=Path), required=True,
                     help="Output directory, created atomically."),
        click.option("--seed", type=int, default=None, help="Override the configured seed."),
        click.option("--samples", type=click.IntRange(min=1), default=None, help="Override Monte-Carlo sample count."),
        click.option("--grid", type=click.IntRange(min=9), default=None, help="Override grid points per axis."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def run_command(name: str, task: Callable[[RunConfig, RunStorage], dict]) -> Callable:
    """Load config, run ``task`` inside a RunStorage and map library errors to exit codes."""

    @run_options
    def command(config_path, out_dir, seed, samples, grid):
        storage = None
        try:
            config = _apply_overrides(load_config(config_path), seed, samples, grid)
            storage = RunStorage(out_dir, name, resolved(config), seed=config.seed)
            summary = task(config, storage)
            storage.finalize(summary=summary)
        except EosLabError as e:
            if storage is not None:
                storage.discard()
            logger.error(f"{name} failed: {e}")
            sys.exit(e.exit_code)
        click.echo(json.dumps(summary, indent=2, sort_keys=True, default=str))
        if name == "oracle-check" and not summary.get("passed", False):
            sys.exit(NumericalWindowError.exit_code)

    command.__name__ = name.replace("-", "_")
    command.__doc__ = task.__doc__
    return command


@click.group()
@click.version_option(__version__, prog_name="eos-lab")
@click.option("--log-dir", type=click.Path(file_okay=False), default=None, help="Directory for the run log.")
@click.option("--verbose", is_flag=True, help="DEBUG logging.")
@click.option("--json-log", is_flag=True, help="Write the log file as JSON lines.")
def cli(log_dir, verbose, json_log):
    """Multi-channel electro-optic sampling statistics."""
    load_dotenv()
    setup_logging(log_dir, level=logging.DEBUG if verbose else logging.INFO, json=json_log)


cli.command("count-dist")(run_command("count-dist", tasks.count_dist))
cli.command("s-curves")(run_command("s-curves", tasks.s_curves))
cli.command("post-state")(run_command("post-state", tasks.post_state))
cli.command("chain")(run_command("chain", tasks.run_chain))
cli.command("fidelity-sweep")(run_command("fidelity-sweep", tasks.fidelity_sweep))
cli.command("oracle-check")(run_command("oracle-check", tasks.oracle_check))


def main():
    cli()


if __name__ == "__main__":
    main()
