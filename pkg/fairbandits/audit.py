"""
Fairness auditing and pseudo-regret against the true payoffs.

A round violates fairness when some arm is played with strictly higher
probability than another arm whose true payoff is at least as high.
"""
from dataclasses import dataclass, field

import numpy as np

from fairbandits.exceptions import TraceError
from fairbandits.models import PROB_TOLERANCE
from fairbandits.utils.calculations import within_delta_budget


@dataclass(frozen=True)
class Violation:
    t: int
    favoured: int
    other: int
    favoured_prob: float
    other_prob: float
    favoured_value: float
    other_value: float


@dataclass
class ViolationReport:
    entries: list = field(default_factory=list)

    @property
    def violated(self):
        return bool(self.entries)

    @property
    def count(self):
        return len(self.entries)

    @property
    def first_violation_round(self):
        return self.entries[0].t if self.entries else None

    def to_dict(self, run_id):
        return {
            'run_id': run_id,
            'violated': self.violated,
            'first_violation_round': self.first_violation_round,
            'count': self.count,
        }


def payoff_matrix(trace, instance):
    """T x k array of true payoffs for the contexts recorded in trace."""
    if instance.is_classic:
        return np.tile(np.asarray(instance.means, dtype=float), (len(trace), 1))
    return np.array([instance.values(row.contexts) for row in trace], dtype=float).reshape(
        len(trace), instance.k)


def probability_matrix(trace, k):
    for row in trace:
        if row.distribution.k != k:
            raise TraceError(f"Round {row.t} has {row.distribution.k} arms, instance has {k}")
    return np.array([row.distribution.probs for row in trace], dtype=float).reshape(len(trace), k)


def audit_fairness(trace, instance):
    probs = probability_matrix(trace, instance.k)
    values = payoff_matrix(trace, instance)
    # flagged[t, j, j'] : pi_j > pi_j' while f_j <= f_j'
    flagged = (probs[:, :, None] > probs[:, None, :] + PROB_TOLERANCE) & (
        values[:, :, None] <= values[:, None, :])
    entries = [
        Violation(
            t=trace[t].t,
            favoured=int(j),
            other=int(other),
            favoured_prob=float(probs[t, j]),
            other_prob=float(probs[t, other]),
            favoured_value=float(values[t, j]),
            other_value=float(values[t, other]),
        )
        for t, j, other in np.argwhere(flagged)
    ]
    return ViolationReport(entries)


def per_round_regret(trace, instance):
    probs = probability_matrix(trace, instance.k)
    values = payoff_matrix(trace, instance)
    if not len(trace):
        return np.zeros(0)
    regret = values.max(axis=1) - (probs * values).sum(axis=1)
    return np.clip(regret, 0.0, None)


def cumulative_pseudo_regret(trace, instance):
    return np.cumsum(per_round_regret(trace, instance))


def audit_eliminations(active_sets, means):
    """
    Check that every arm leaving the active set has a true mean strictly below
    every arm that stays.
    """
    previous = None
    for active in active_sets:
        active = frozenset(active)
        if previous is not None:
            if not active <= previous:
                return False
            for gone in previous - active:
                if any(means[gone] >= means[kept] for kept in active):
                    return False
        previous = active
    return True


def active_sets_from_intervals(rows):
    """Per-round active sets from (t, arm, lower, upper, active) interval rows."""
    rounds = {}
    for t, arm, _, _, active in rows:
        members = rounds.setdefault(t, set())
        if active:
            members.add(arm)
    return [frozenset(rounds[t]) for t in sorted(rounds)]


def intervals_contain_means(rows, means):
    """True when every true mean stays inside its interval on every row."""
    return all(lower <= means[arm] <= upper for _, arm, lower, upper, _ in rows)


def summarize_runs(reports, delta):
    violated = sum(1 for report in reports if report.violated)
    trials = len(reports)
    return {
        'trials': trials,
        'violated_runs': violated,
        'violation_fraction': violated / trials if trials else 0.0,
        'within_budget': within_delta_budget(violated, trials, delta),
    }
