import json

import click
from flask import Blueprint, current_app

from fairbandits.algorithms.kwik import LEARNERS
from fairbandits.commands import U64
from fairbandits.harness import (
    LEARNER_FAMILIES, ExperimentConfig, load_sequence, run_kwik_trial,
)
from fairbandits.utils.decorators import handles_experiment_errors

bp = Blueprint('kwik_bound', __name__, cli_group=None)


@bp.cli.command('kwik-bound')
@click.option('--learner', type=click.Choice(LEARNERS), required=True)
@click.option('--d', 'd', type=click.IntRange(min=1), default=4, help='Context dimension.')
@click.option('--epsilon', type=float, default=0.1)
@click.option('--delta', type=float, default=0.1)
@click.option('--mean', type=float, default=0.5, help='True mean for bernoulli_mean streams.')
@click.option('--length', type=click.IntRange(min=1), default=1000, help='Generated stream length.')
@click.option('--sequence', 'sequence_path', type=click.Path(dir_okay=False), default=None,
              help='JSON list of [context, label] pairs; generated when omitted.')
@click.option('--seed', type=U64, default=None)
@handles_experiment_errors
def kwik_bound(learner, d, epsilon, delta, mean, length, sequence_path, seed):
    """Run a KWIK learner over a sequence and report its DONT_KNOW count."""
    defaults = current_app.config['EXPERIMENT_DEFAULTS']
    config = ExperimentConfig.from_dict({
        'algorithm': learner,
        'family': LEARNER_FAMILIES[learner],
        'd': d,
        'epsilon': epsilon,
        'delta': delta,
        'means': [mean],
        'k': 1,
        'horizon': length,
        'seed': defaults['seed'] if seed is None else seed,
        'max_enum_dim': defaults['max_enum_dim'],
    })
    sequence = None if sequence_path is None else load_sequence(sequence_path, learner, d)
    run = run_kwik_trial(config, 0, sequence)
    click.echo(json.dumps({
        'learner': learner,
        'd': d,
        'dont_know': run.dont_know,
        'bound': run.bound,
        'mistakes': run.mistakes,
        'rounds': run.rounds,
    }, indent=2))
