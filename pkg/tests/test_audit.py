import numpy as np
import pytest

from fairbandits.audit import (
    active_sets_from_intervals, audit_eliminations, audit_fairness, cumulative_pseudo_regret,
    intervals_contain_means, per_round_regret, summarize_runs, ViolationReport, Violation,
)
from fairbandits.exceptions import TraceError
from fairbandits.harness import ExperimentConfig, run_trial
from fairbandits.instances import make_bernoulli_instance
from fairbandits.models import UNIT, ArmDistribution, BanditInstance, ContextualArm, RealVector, RoundTrace


def classic_trace(probs_per_round, k):
    trace = []
    for t, probs in enumerate(probs_per_round, start=1):
        distribution = ArmDistribution(tuple(probs))
        chosen = next(j for j, p in enumerate(distribution.probs) if p > 0)
        trace.append(RoundTrace(t, (UNIT,) * k, distribution, chosen, 0.0))
    return trace


def test_probability_gap_against_better_arm_is_flagged():
    instance = make_bernoulli_instance((0.3, 0.7))
    report = audit_fairness(classic_trace([(0.6, 0.4)], 2), instance)
    assert report.violated
    (entry,) = report.entries
    assert (entry.t, entry.favoured, entry.other) == (1, 0, 1)
    assert (entry.favoured_prob, entry.other_prob) == (0.6, 0.4)
    assert report.to_dict(4) == {'run_id': 4, 'violated': True, 'first_violation_round': 1, 'count': 1}


def test_uniform_play_is_always_fair():
    instance = make_bernoulli_instance((0.9, 0.1, 0.5))
    report = audit_fairness(classic_trace([(1 / 3,) * 3] * 20, 3), instance)
    assert not report.violated
    assert report.first_violation_round is None


def test_equal_means_with_probability_gap_violate():
    instance = make_bernoulli_instance((0.5, 0.5))
    report = audit_fairness(classic_trace([(0.5, 0.5), (1.0, 0.0)], 2), instance)
    assert report.count == 1
    assert report.first_violation_round == 2


def brute_force(trace, instance):
    flagged = []
    for row in trace:
        values = instance.values(row.contexts)
        probs = row.distribution.probs
        for j in range(instance.k):
            for other in range(instance.k):
                if probs[j] > probs[other] + 1e-12 and values[j] <= values[other]:
                    flagged.append((row.t, j, other))
    return flagged


@pytest.mark.parametrize('seed', range(20))
def test_auditor_matches_pairwise_scan(seed):
    gen = np.random.default_rng(seed)
    k = int(gen.integers(2, 7))
    horizon = int(gen.integers(1, 101))
    instance = make_bernoulli_instance(tuple(gen.choice([0.2, 0.5, 0.8], size=k)))
    rounds = []
    for _ in range(horizon):
        support = [j for j in range(k) if gen.random() < 0.6] or [0]
        rounds.append(ArmDistribution.uniform(k, support).probs)
    trace = classic_trace(rounds, k)
    report = audit_fairness(trace, instance)
    assert [(v.t, v.favoured, v.other) for v in report.entries] == brute_force(trace, instance)


def test_regret_of_uniform_play():
    instance = make_bernoulli_instance((0.9, 0.1))
    regret = cumulative_pseudo_regret(classic_trace([(0.5, 0.5)] * 10, 2), instance)
    assert regret[-1] == pytest.approx(4.0)
    assert len(regret) == 10


def test_regret_of_best_arm_point_mass():
    instance = make_bernoulli_instance((0.9, 0.1))
    regret = cumulative_pseudo_regret(classic_trace([(1.0, 0.0)] * 10, 2), instance)
    assert np.all(regret == 0.0)


def test_contextual_regret_uses_per_round_values():
    instance = BanditInstance(arms=(ContextualArm('dial', (), 1),) * 2, family='dial')
    contexts = (RealVector((0.8,)), RealVector((0.3,)))
    row = RoundTrace(1, contexts, ArmDistribution((0.5, 0.5)), 1, 0.3)
    assert per_round_regret([row], instance)[0] == pytest.approx(0.25)


def test_regret_is_nonnegative_and_nondecreasing():
    gen = np.random.default_rng(3)
    instance = make_bernoulli_instance((0.2, 0.6, 0.4, 0.9))
    rounds = [tuple(gen.dirichlet(np.ones(4))) for _ in range(200)]
    regret = cumulative_pseudo_regret(classic_trace(rounds, 4), instance)
    assert np.all(regret >= 0)
    assert np.all(np.diff(regret) >= 0)


def test_empty_trace():
    instance = make_bernoulli_instance((0.9, 0.1))
    assert len(cumulative_pseudo_regret([], instance)) == 0
    assert not audit_fairness([], instance).violated


def test_arity_mismatch():
    instance = make_bernoulli_instance((0.9, 0.1, 0.5))
    with pytest.raises(TraceError):
        audit_fairness(classic_trace([(0.5, 0.5)], 2), instance)


def test_reference_fair_bandits_run_is_fair():
    config = ExperimentConfig(
        algorithm='fair_bandits', family='lower_bound', k=5, delta=0.2, horizon=5000, seed=11)
    result = run_trial(config.validate(), 0)
    assert not result.report.violated


def test_elimination_order():
    means = (0.9, 0.5, 0.1)
    assert audit_eliminations([{0, 1, 2}, {0, 1}, {0}], means)
    assert not audit_eliminations([{0, 1, 2}, {1, 2}], means)
    assert not audit_eliminations([{0, 1}, {0, 1, 2}], means)
    assert not audit_eliminations([{0, 1, 2}, {0, 2}], (0.9, 0.5, 0.5))


def test_interval_rows():
    rows = [
        (1, 0, 0.0, 1.0, 1), (1, 1, 0.0, 1.0, 1),
        (2, 0, 0.6, 0.95, 1), (2, 1, 0.05, 0.3, 0),
    ]
    assert active_sets_from_intervals(rows) == [frozenset({0, 1}), frozenset({0})]
    assert intervals_contain_means(rows, (0.8, 0.2))
    assert not intervals_contain_means(rows, (0.5, 0.2))


def test_run_summary_budget():
    fair = ViolationReport()
    unfair = ViolationReport([Violation(1, 0, 1, 1.0, 0.0, 0.1, 0.9)])
    summary = summarize_runs([fair, unfair], 0.2)
    assert summary == {'trials': 2, 'violated_runs': 1, 'violation_fraction': 0.5, 'within_budget': True}
    summary = summarize_runs([unfair] * 40 + [fair] * 60, 0.2)
    assert summary['violation_fraction'] == 0.4
    assert not summary['within_budget']
