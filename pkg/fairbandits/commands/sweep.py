import json

import click
from flask import Blueprint, current_app

from fairbandits.commands import experiment_options
from fairbandits.harness import SWEEP_AXES, load_config, sweep
from fairbandits.utils.decorators import handles_experiment_errors

bp = Blueprint('sweep', __name__, cli_group=None)


def parse_values(ctx, param, value):
    try:
        return [int(v) for v in value.split(',') if v.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got '{value}'")


@bp.cli.command('sweep')
@experiment_options
@click.option('--axis', type=click.Choice(list(SWEEP_AXES)), required=True, help='Swept parameter.')
@click.option('--values', callback=parse_values, required=True, help='Comma-separated, increasing.')
@handles_experiment_errors
def sweep_command(config_path, seed, jobs, output_dir, axis, values):
    """Run a config once per value of k, d or T and tabulate the results."""
    config = load_config(
        config_path, current_app.config['EXPERIMENT_DEFAULTS'],
        seed=seed, jobs=jobs, output_dir=output_dir)
    rows = sweep(config, axis, values)
    click.echo(json.dumps(rows, indent=2))
