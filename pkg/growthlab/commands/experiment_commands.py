import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

import click

from growthlab.commands.schemas import ExperimentConfig
from growthlab.services.errors import UntrustedRadiusError
from growthlab.services.experiment_service import (
    EXIT_CONFIG,
    EXIT_NUMERIC,
    EXIT_UNTRUSTED,
    ExperimentService,
)
from growthlab.services.family_service import FamilyService
from growthlab.workers.pool import WorkerPool

logger = logging.getLogger(__name__)

experiment_service = ExperimentService()
family_service = FamilyService()


def load_config(path: str, out: Optional[str] = None, seed: Optional[int] = None,
                jobs: Optional[int] = None) -> ExperimentConfig:
    """Read a JSON config; command-line flags override its top-level fields."""
    with open(path, "r", encoding="utf-8") as file:
        data = json.load(file)
    if not isinstance(data, dict):
        raise ValueError("The config must be a JSON object")
    overrides = {"output_dir": out, "seed": seed, "jobs": jobs}
    data.update({key: value for key, value in overrides.items() if value is not None})
    return ExperimentConfig.model_validate(data)


def _execute(config_path: str, out: Optional[str], seed: Optional[int], jobs: Optional[int],
             theorems: Optional[List[str]] = None, write_coefficients: bool = False,
             require_pde: bool = False) -> None:
    try:
        config = load_config(config_path, out, seed, jobs)
        if require_pde and config.family.name != "pde_solution":
            raise ValueError("The pde command needs the 'pde_solution' family")
    except (OSError, ValueError) as e:
        click.echo(f"Config error: {e}", err=True)
        sys.exit(EXIT_CONFIG)

    try:
        with WorkerPool.session(config.jobs):
            outcome = experiment_service.run(config, theorems, write_coefficients)

    except UntrustedRadiusError as e:
        click.echo(f"Untrusted grid: {e}", err=True)
        sys.exit(EXIT_UNTRUSTED)

    except ValueError as e:
        click.echo(f"Config error: {e}", err=True)
        sys.exit(EXIT_CONFIG)

    except ArithmeticError as e:
        click.echo(f"Numeric failure: {e}", err=True)
        sys.exit(EXIT_NUMERIC)

    for verdict in outcome.verdicts:
        click.echo(verdict.line)
    if outcome.message:
        click.echo(outcome.message)
    click.echo(f"Artifacts written to {Path(config.output_dir).resolve()}")
    sys.exit(outcome.exit_code)


def _run_options(command):
    command = click.option("--jobs", type=click.IntRange(min=1), default=None,
                           help="Worker threads for per-radius work.")(command)
    command = click.option("--seed", type=click.IntRange(min=0), default=None,
                           help="Override the config seed.")(command)
    command = click.option("--out", type=click.Path(file_okay=False), default=None,
                           help="Override the output directory.")(command)
    command = click.option("--config", "config_path", type=click.Path(dir_okay=False),
                           required=True, help="Experiment config (JSON).")(command)
    return command


@click.command()
@_run_options
def profile(config_path, out, seed, jobs):
    """Write growth_profile.csv for the configured function."""
    _execute(config_path, out, seed, jobs, theorems=[])


@click.command()
@_run_options
def verify(config_path, out, seed, jobs):
    """Profile the function and verify the selected theorems."""
    _execute(config_path, out, seed, jobs)


@click.command()
@_run_options
def pde(config_path, out, seed, jobs):
    """Solve the configured PDE instance and check its hyper-order."""
    try:
        extra = load_config(config_path, out, seed, jobs).theorems
    except (OSError, ValueError) as e:
        click.echo(f"Config error: {e}", err=True)
        sys.exit(EXIT_CONFIG)
    theorems = ["T41"] + [name for name in extra if name != "T41"]
    _execute(config_path, out, seed, jobs, theorems=theorems, write_coefficients=True,
             require_pde=True)


@click.command()
def families():
    """List the built-in function families and their parameters."""
    for schema in family_service.list_families():
        click.echo(f"{schema['name']}: {schema.get('description', '')}")
        for name, meaning in schema.get("parameters", {}).items():
            click.echo(f"    {name}: {meaning}")
