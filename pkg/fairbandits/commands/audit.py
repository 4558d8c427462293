import click
from flask import Blueprint

from fairbandits.commands import summary_json
from fairbandits.harness import reaudit
from fairbandits.utils.decorators import handles_experiment_errors

bp = Blueprint('audit', __name__, cli_group=None)


@bp.cli.command('audit')
@click.option('--out', 'output_dir', type=click.Path(file_okay=False), required=True,
              help='Directory written by simulate.')
@handles_experiment_errors
def audit(output_dir):
    """Re-audit the traces stored by a previous simulate run."""
    click.echo(summary_json(reaudit(output_dir)))
