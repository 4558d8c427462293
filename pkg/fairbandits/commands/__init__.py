# Command blueprints package
import json

import click

U64 = click.IntRange(0, 2 ** 64 - 1)


def experiment_options(f):
    """Shared --config/--seed/--jobs/--out flags."""
    f = click.option('--out', 'output_dir', type=click.Path(file_okay=False), default=None,
                     help='Output directory (overrides the config document).')(f)
    f = click.option('--jobs', type=click.IntRange(min=1), default=None,
                     help='Trials run in parallel.')(f)
    f = click.option('--seed', type=U64, default=None, help='Master seed.')(f)
    f = click.option('--config', 'config_path', required=True, type=click.Path(dir_okay=False),
                     help='Experiment config JSON.')(f)
    return f


def summary_json(summary):
    """Summary without the per-run list, for the terminal."""
    return json.dumps({key: value for key, value in summary.items() if key != 'runs'}, indent=2)
