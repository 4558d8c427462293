"""
Experiment harness.

An ExperimentConfig names an algorithm and an instance family. Each trial
derives its own random substream from (seed, trial), so trials can run in
any order or in parallel and the merged outputs do not change.
"""
import csv
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from functools import partial

import numpy as np

from fairbandits.algorithms.baselines import ConjunctionBandit, Ucb, UniformPolicy
from fairbandits.algorithms.classic_fair import FairBandits
from fairbandits.algorithms.kwik import (
    LEARNERS, KwikBudget, kwik_feedback, kwik_predict, learner_bound, make_learner,
)
from fairbandits.algorithms.reductions import DoublingKwikToFair, KwikToFair
from fairbandits.audit import (
    audit_fairness, cumulative_pseudo_regret, summarize_runs,
)
from fairbandits.exceptions import ConfigError
from fairbandits.instances import (
    LINEAR_LINK, adversarial_conjunction_sequence, context_stream_for,
    make_bernoulli_instance, make_conjunction_instance, make_linear_instance,
    sample_lower_bound_instance, unit_ball_point,
)
from fairbandits.models import (
    UNIT, ArmDistribution, BanditInstance, BoolVector, RealVector, Rng, RoundTrace, append_round,
    sample_reward,
)
from fairbandits.utils.calculations import fair_bandits_regret_bound, regret_rate, standard_error
from fairbandits.utils import validators

logger = logging.getLogger(__name__)

POLICIES = ('fair_bandits', 'ucb', 'uniform', 'conjunction_bandit', 'kwik_to_fair', 'kwik_to_fair_doubling')
ALGORITHMS = POLICIES + LEARNERS
FAMILIES = ('lower_bound', 'bernoulli', 'linear', 'conjunction', 'adversarial_conjunction')
CLASSIC_FAMILIES = ('lower_bound', 'bernoulli')
SWEEP_AXES = {'k': 'k', 'd': 'd', 'T': 'horizon'}
# fields that never change results
RUN_SETTINGS = ('jobs', 'output_dir')

# algorithm -> families it can run on
COMPATIBLE = {
    'fair_bandits': CLASSIC_FAMILIES,
    'ucb': CLASSIC_FAMILIES,
    'uniform': ('lower_bound', 'bernoulli', 'linear', 'conjunction'),
    'conjunction_bandit': ('conjunction',),
    'kwik_to_fair': ('lower_bound', 'bernoulli', 'linear', 'conjunction'),
    'kwik_to_fair_doubling': ('lower_bound', 'bernoulli', 'linear', 'conjunction'),
    'bernoulli_mean': CLASSIC_FAMILIES,
    'noiseless_linear': ('linear',),
    'enum_conjunction': ('adversarial_conjunction', 'conjunction'),
}


@dataclass
class ExperimentConfig:
    algorithm: str
    family: str
    horizon: int = 1000
    delta: float = 0.1
    epsilon: float = 0.1
    k: int = 2
    d: int = 1
    means: list = None
    max_variables: int = 3
    trials: int = 1
    seed: int = 7
    jobs: int = 1
    output_dir: str = 'results'
    max_enum_dim: int = 16

    @classmethod
    def from_dict(cls, data, defaults=None):
        known = {f.name for f in fields(cls)}
        merged = dict(defaults or {})
        unknown = [key for key in data if key not in known]
        if unknown:
            raise ConfigError(f"unknown configuration key(s): {', '.join(sorted(unknown))}")
        merged.update(data)
        for key in ('algorithm', 'family'):
            if key not in merged:
                raise ConfigError(f"configuration is missing '{key}'")
        if merged.get('means') is not None and 'k' not in data:
            merged['k'] = len(merged['means'])
        return cls(**merged).validate()

    def validate(self):
        checks = [
            validators.validate_choice('algorithm', self.algorithm, ALGORITHMS),
            validators.validate_choice('family', self.family, FAMILIES),
            validators.validate_delta(self.delta),
            validators.validate_epsilon(self.epsilon),
            validators.validate_horizon(self.horizon),
            validators.validate_arm_count(self.k, minimum=2 if self.family == 'lower_bound' else 1),
            validators.validate_dimension(self.d),
            validators.validate_trials(self.trials),
            validators.validate_seed(self.seed),
        ]
        if self.means is not None:
            checks.append(validators.validate_means(self.means))
            if len(self.means) != self.k:
                checks.append((False, f"means has {len(self.means)} entries but k={self.k}"))
        elif self.family == 'bernoulli':
            checks.append((False, "the bernoulli family needs 'means'"))
        if self.family in ('conjunction', 'adversarial_conjunction') or self.algorithm == 'enum_conjunction':
            checks.append(validators.validate_dimension(self.d, maximum=self.max_enum_dim))
        if (self.family == 'adversarial_conjunction' or self.algorithm == 'enum_conjunction') \
                and isinstance(self.d, int) and self.d < 2:
            checks.append((False, f"the adversarial conjunction sequence needs d >= 2, got {self.d}"))
        if self.algorithm in COMPATIBLE and self.family in FAMILIES and self.family not in COMPATIBLE[self.algorithm]:
            checks.append((False, f"algorithm '{self.algorithm}' cannot run on family '{self.family}'"))
        if self.algorithm in POLICIES and self.family == 'adversarial_conjunction':
            checks.append((False, "the adversarial_conjunction family only drives KWIK learners"))
        if self.algorithm in ('bernoulli_mean', 'kwik_to_fair', 'kwik_to_fair_doubling') and self.epsilon <= 0:
            checks.append((False, f"epsilon must be positive for '{self.algorithm}'"))
        if not isinstance(self.jobs, int) or self.jobs < 1:
            checks.append((False, f"jobs must be an integer >= 1, got {self.jobs!r}"))
        errors = [message for ok, message in checks if not ok]
        if errors:
            raise ConfigError('; '.join(errors))
        return self

    def to_dict(self):
        """The experiment itself; where and how many workers ran it are left out."""
        return {key: value for key, value in asdict(self).items() if key not in RUN_SETTINGS}


def load_config(path, defaults=None, **overrides):
    """Read a JSON config; non-None overrides replace document values."""
    with open(path, 'r', encoding='utf-8') as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must contain a JSON object")
    data.update({key: value for key, value in overrides.items() if value is not None})
    return ExperimentConfig.from_dict(data, defaults)


# Building blocks

def build_instance(config, rng):
    if config.family == 'lower_bound':
        instance = sample_lower_bound_instance(config.k, rng).instance()
    elif config.family == 'bernoulli':
        instance = make_bernoulli_instance(config.means)
    elif config.family == 'linear':
        instance = make_linear_instance(config.d, config.k, rng)
    elif config.family == 'conjunction':
        instance = make_conjunction_instance(config.d, config.k, rng, config.max_variables)
    else:
        raise ConfigError(f"family '{config.family}' does not build a bandit instance")
    return replace(instance, seed=config.seed)


def learner_for_family(family):
    if family in CLASSIC_FAMILIES:
        return 'bernoulli_mean'
    if family == 'linear':
        return 'noiseless_linear'
    return 'enum_conjunction'


def build_policy(config, instance):
    k = instance.k
    if config.algorithm == 'fair_bandits':
        return FairBandits(k, config.delta)
    if config.algorithm == 'ucb':
        return Ucb(k)
    if config.algorithm == 'uniform':
        return UniformPolicy(k)
    if config.algorithm == 'conjunction_bandit':
        return ConjunctionBandit(k, config.d)
    name = learner_for_family(config.family)
    factory = partial(make_learner, name, d=config.d, link=LINEAR_LINK, max_dim=config.max_enum_dim)
    bound = learner_bound(name, config.d)
    if config.algorithm == 'kwik_to_fair':
        return KwikToFair(k, config.horizon, config.delta, factory, bound)
    if config.algorithm == 'kwik_to_fair_doubling':
        return DoublingKwikToFair(k, config.delta, factory, bound)
    raise ConfigError(f"unknown algorithm '{config.algorithm}'")


@dataclass
class TrialResult:
    trial: int
    instance: BanditInstance
    trace: list
    intervals: list
    report: object
    regret: np.ndarray
    dont_know: int = None


@dataclass
class KwikRun:
    trial: int
    dont_know: int
    bound: int
    mistakes: int
    rounds: int


def simulate(policy, instance, stream, horizon, rng, record_intervals=False):
    """Drive a policy for horizon rounds; returns (trace, interval rows)."""
    context_rng = rng.child(1)
    play_rng = rng.child(2)
    trace = []
    intervals = []
    for t in range(1, horizon + 1):
        contexts = stream.draw(context_rng)
        distribution, chosen = policy.select(contexts, play_rng)
        if record_intervals:
            intervals.extend(policy.interval_rows())
        reward = sample_reward(instance, chosen, contexts[chosen], play_rng)
        predictions = policy.predictions()
        policy.observe(chosen, contexts, reward)
        append_round(trace, RoundTrace(t, contexts, distribution, chosen, reward, predictions))
    return trace, intervals


def run_trial(config, trial):
    """Run one seeded trial of a bandit policy."""
    logger.debug(f"Trial {trial} of {config.algorithm} on {config.family} starting")
    rng = Rng.for_trial(config.seed, trial)
    instance = build_instance(config, rng.child(0))
    policy = build_policy(config, instance)
    trace, intervals = simulate(
        policy, instance, context_stream_for(instance), config.horizon, rng,
        record_intervals=config.algorithm == 'fair_bandits')
    result = TrialResult(
        trial=trial,
        instance=instance,
        trace=trace,
        intervals=intervals,
        report=audit_fairness(trace, instance),
        regret=cumulative_pseudo_regret(trace, instance),
        dont_know=getattr(policy, 'dont_know_count', None),
    )
    logger.debug(f"Trial {trial} finished with regret {result.regret[-1]:.4f}")
    return result


def run_kwik_sequence(learner, budget, sequence):
    """
    Run the KWIK protocol over (context, label, truth) items.

    DONT_KNOW answers are charged to the budget and are the only rounds
    whose label is revealed. Returns the number of Values further than
    epsilon from the truth.
    """
    mistakes = 0
    for x, y, truth in sequence:
        prediction = kwik_predict(learner, budget, x)
        if prediction.dont_know:
            kwik_feedback(learner, x, y)
        elif abs(prediction.value - truth) > budget.epsilon + 1e-9:
            mistakes += 1
    if budget.exceeded:
        logger.warning(f"{type(learner).__name__} said DONT_KNOW {budget.dont_know_count} times (bound {budget.bound})")
    return mistakes


def generated_sequence(config, rng):
    """Learner input matching the config's algorithm."""
    if config.algorithm == 'enum_conjunction':
        return [(x, y, y) for x, y in adversarial_conjunction_sequence(config.d)]
    if config.algorithm == 'noiseless_linear':
        scale, offset = LINEAR_LINK
        theta = unit_ball_point(config.d, rng)
        items = []
        for _ in range(config.horizon):
            x = RealVector(tuple(unit_ball_point(config.d, rng)))
            y = min(max(scale * float(theta @ x.as_array()) + offset, 0.0), 1.0)
            items.append((x, y, y))
        return items
    mean = config.means[0] if config.means else 0.5
    return [(UNIT, float(rng.bernoulli(mean)), mean) for _ in range(config.horizon)]


def run_kwik_trial(config, trial, sequence=None):
    rng = Rng.for_trial(config.seed, trial)
    learner = make_learner(
        config.algorithm, config.epsilon, config.delta, d=config.d, link=LINEAR_LINK,
        max_dim=config.max_enum_dim)
    if sequence is None:
        sequence = generated_sequence(config, rng)
    budget = KwikBudget(config.epsilon, config.delta, learner.kwik_bound())
    mistakes = run_kwik_sequence(learner, budget, sequence)
    return KwikRun(trial, budget.dont_know_count, budget.bound, mistakes, len(sequence))


def run_trials(config):
    runner = run_kwik_trial if config.algorithm in LEARNERS else run_trial
    trials = range(config.trials)
    if config.jobs > 1 and config.trials > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            return list(pool.map(runner, [config] * config.trials, trials))
    return [runner(config, trial) for trial in trials]


# Output

def _number(value):
    return repr(float(value))


def _cell(value):
    """Sweep cell; None is left empty."""
    if value is None:
        return ''
    return _number(value) if isinstance(value, float) else value


def _ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path


def write_json(path, data):
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        json.dump(data, f, indent=2)
        f.write('\n')


def write_csv(path, header, rows):
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        writer.writerows(rows)


def trace_header(k, with_predictions):
    header = ['t', 'chosen', 'reward'] + [f'p_{j}' for j in range(k)]
    if with_predictions:
        header += [f'prediction_{j}' for j in range(k)] + [f'dont_know_{j}' for j in range(k)]
    return header + ['contexts']


def trace_rows(trace, with_predictions):
    for row in trace:
        values = [row.t, row.chosen, _number(row.reward)] + [_number(p) for p in row.distribution.probs]
        if with_predictions:
            predictions = row.predictions or (None,) * row.distribution.k
            values += ['' if p is None else _number(p) for p in predictions]
            values += [int(p is None) for p in predictions]
        contexts = json.dumps([x.to_json() for x in row.contexts], separators=(',', ':'))
        yield values + [contexts]


def write_trace(path, trace, k):
    with_predictions = any(row.predictions is not None for row in trace)
    write_csv(path, trace_header(k, with_predictions), trace_rows(trace, with_predictions))


def read_trace(path, instance):
    """Rebuild RoundTrace rows from a trace CSV written by write_trace."""
    k = instance.k
    trace = []
    with open(path, 'r', encoding='utf-8', newline='') as f:
        for record in csv.DictReader(f):
            raw_contexts = json.loads(record['contexts'])
            predictions = None
            if 'prediction_0' in record:
                predictions = tuple(
                    None if record[f'prediction_{j}'] == '' else float(record[f'prediction_{j}'])
                    for j in range(k))
            append_round(trace, RoundTrace(
                t=int(record['t']),
                contexts=tuple(instance.context_from_json(j, raw) for j, raw in enumerate(raw_contexts)),
                distribution=ArmDistribution(tuple(float(record[f'p_{j}']) for j in range(k))),
                chosen=int(record['chosen']),
                reward=float(record['reward']),
                predictions=predictions,
            ))
    return trace


def regret_table(results):
    curves = np.array([result.regret for result in results], dtype=float)
    mean = curves.mean(axis=0)
    stderr = standard_error(curves, axis=0)
    return [(t + 1, _number(mean[t]), _number(stderr[t])) for t in range(curves.shape[1])]


def run_experiment(config):
    """Run every trial and write the outputs; returns a summary dictionary."""
    out = _ensure_dir(config.output_dir)
    write_json(os.path.join(out, 'config.json'), config.to_dict())
    results = run_trials(config)

    if config.algorithm in LEARNERS:
        write_csv(
            os.path.join(out, 'kwik.csv'),
            ['trial', 'dont_know', 'bound', 'mistakes', 'rounds'],
            [(r.trial, r.dont_know, r.bound, r.mistakes, r.rounds) for r in results])
        summary = {
            'algorithm': config.algorithm,
            'trials': len(results),
            'dont_know_max': max(r.dont_know for r in results),
            'bound': results[0].bound,
            'mistakes': sum(r.mistakes for r in results),
        }
        logger.info(f"{config.algorithm}: max DONT_KNOW count {summary['dont_know_max']} (bound {summary['bound']})")
        return summary

    for result in results:
        tag = f'{result.trial:03d}'
        instance_data = result.instance.to_dict()
        instance_data['trial'] = result.trial
        write_json(os.path.join(out, f'instance_{tag}.json'), instance_data)
        write_trace(os.path.join(out, f'trace_{tag}.csv'), result.trace, result.instance.k)
        if result.intervals:
            write_csv(
                os.path.join(out, f'intervals_{tag}.csv'),
                ['t', 'arm', 'lower', 'upper', 'active'],
                [(t, arm, _number(lo), _number(hi), active) for t, arm, lo, hi, active in result.intervals])
    write_csv(os.path.join(out, 'regret.csv'), ['t', 'mean', 'stderr'], regret_table(results))

    reports = [result.report for result in results]
    summary = {
        'algorithm': config.algorithm,
        'family': config.family,
        'delta': config.delta,
        **summarize_runs(reports, config.delta),
        'mean_regret': float(np.mean([result.regret[-1] for result in results])),
        'trailing_regret_rate': float(np.mean([regret_rate(result.regret) for result in results])),
        'runs': [result.report.to_dict(result.trial) for result in results],
    }
    if config.algorithm == 'fair_bandits':
        summary['regret_bound'] = fair_bandits_regret_bound(config.horizon, results[0].instance.k, config.delta)
    write_json(os.path.join(out, 'audit.json'), summary)
    logger.info(
        f"{config.algorithm} on {config.family}: {summary['violated_runs']}/{summary['trials']} runs "
        f"violated fairness, mean regret {summary['mean_regret']:.4f}")
    return summary


def reaudit(out_dir):
    """Audit the traces stored in an experiment directory again."""
    with open(os.path.join(out_dir, 'config.json'), 'r', encoding='utf-8') as f:
        config = ExperimentConfig.from_dict(json.load(f))
    reports = []
    runs = []
    for trial in range(config.trials):
        tag = f'{trial:03d}'
        with open(os.path.join(out_dir, f'instance_{tag}.json'), 'r', encoding='utf-8') as f:
            instance = BanditInstance.from_dict(json.load(f))
        trace = read_trace(os.path.join(out_dir, f'trace_{tag}.csv'), instance)
        report = audit_fairness(trace, instance)
        reports.append(report)
        runs.append(report.to_dict(trial))
    summary = {'delta': config.delta, **summarize_runs(reports, config.delta), 'runs': runs}
    write_json(os.path.join(out_dir, 'reaudit.json'), summary)
    return summary


def sweep(config, axis, values):
    """One summary row per axis value; also written to sweep_<axis>.csv."""
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis '{axis}' (expected one of: {', '.join(SWEEP_AXES)})")
    ok, message = validators.validate_axis_values(values)
    if not ok:
        raise ConfigError(message)
    if axis == 'k' and config.means is not None:
        raise ConfigError("cannot sweep k when the config fixes 'means'")

    rows = []
    for value in values:
        point = replace(config, **{SWEEP_AXES[axis]: value}).validate()
        results = run_trials(point)
        if config.algorithm in LEARNERS:
            rows.append({
                axis: value,
                'mean_regret': None,
                'per_round_regret': None,
                'violation_fraction': None,
                'dont_know_mean': float(np.mean([r.dont_know for r in results])),
                'dont_know_max': max(r.dont_know for r in results),
            })
            continue
        finals = [result.regret[-1] for result in results]
        dont_know = [result.dont_know for result in results if result.dont_know is not None]
        rows.append({
            axis: value,
            'mean_regret': float(np.mean(finals)),
            'per_round_regret': float(np.mean(finals)) / point.horizon,
            'violation_fraction': summarize_runs([r.report for r in results], point.delta)['violation_fraction'],
            'dont_know_mean': float(np.mean(dont_know)) if dont_know else 0.0,
            'dont_know_max': max(dont_know) if dont_know else 0,
        })
        logger.info(f"Sweep {axis}={value}: mean regret {rows[-1]['mean_regret']:.4f}")

    header = [axis, 'mean_regret', 'per_round_regret', 'violation_fraction', 'dont_know_mean', 'dont_know_max']
    out = _ensure_dir(config.output_dir)
    write_csv(
        os.path.join(out, f'sweep_{axis}.csv'), header,
        [[row[axis]] + [_cell(row[h]) for h in header[1:]]
         for row in rows])
    return rows


LEARNER_FAMILIES = {
    'enum_conjunction': 'adversarial_conjunction',
    'noiseless_linear': 'linear',
    'bernoulli_mean': 'bernoulli',
}


def parse_sequence(data, learner, d=None):
    """
    Turn [[context, label], ...] into learner input; the label doubles as truth.

    When d is given every vector context must have exactly d coordinates.
    """
    if not isinstance(data, list):
        raise ConfigError("a KWIK sequence must be a JSON list of [context, label] pairs")
    items = []
    for position, entry in enumerate(data):
        if not isinstance(entry, (list, tuple)) or len(entry) != 2:
            raise ConfigError(f"sequence entry {position} is not a [context, label] pair")
        raw, label = entry
        try:
            if learner == 'enum_conjunction':
                x = BoolVector(tuple(raw))
            elif learner == 'noiseless_linear':
                x = RealVector(tuple(raw))
            else:
                x = UNIT
            label = float(label)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"sequence entry {position} is malformed: {e}") from e
        if d is not None and x is not UNIT and x.dimension != d:
            raise ConfigError(f"sequence entry {position} has dimension {x.dimension}, expected d={d}")
        items.append((x, label, label))
    return items


def load_sequence(path, learner, d=None):
    with open(path, 'r', encoding='utf-8') as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path} is not valid JSON: {e}") from e
    return parse_sequence(data, learner, d)
