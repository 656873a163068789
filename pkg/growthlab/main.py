import logging

import click

from growthlab import __version__
from growthlab.commands.experiment_commands import families, pde, profile, verify
from growthlab.config.settings import settings


@click.group()
@click.version_option(__version__, prog_name="growthlab")
@click.option("--log-level", default=None, help="Logging level (default from settings).")
def cli(log_level):
    """Numerical laboratory for growth of entire functions in C^m."""
    logging.basicConfig(
        level=(log_level or settings.log_level).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


cli.add_command(profile)
cli.add_command(verify)
cli.add_command(pde)
cli.add_command(families)


if __name__ == "__main__":
    cli()
