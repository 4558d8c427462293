import click
from flask import Blueprint, current_app

from fairbandits.commands import experiment_options, summary_json
from fairbandits.harness import load_config, run_experiment
from fairbandits.utils.decorators import handles_experiment_errors

bp = Blueprint('simulate', __name__, cli_group=None)


@bp.cli.command('simulate')
@experiment_options
@handles_experiment_errors
def simulate(config_path, seed, jobs, output_dir):
    """Run every trial of one experiment config and write its outputs."""
    config = load_config(
        config_path, current_app.config['EXPERIMENT_DEFAULTS'],
        seed=seed, jobs=jobs, output_dir=output_dir)
    current_app.logger.info(f"Running {config.trials} trial(s) of {config.algorithm} into {config.output_dir}")
    summary = run_experiment(config)
    click.echo(summary_json(summary))
