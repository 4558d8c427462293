"""
Instance generators and lower-bound analysis.

The lower-bound prior gives arm i (1-based) a mean of either
1/3 + i/(3k) or 1/3 + (i+1)/(3k) with a fair coin, so neighbouring arms
collide with probability 1/4 and a fair algorithm has to tell every pair
apart before it may favour either.
"""
import math
from dataclasses import dataclass

import numpy as np

from fairbandits.exceptions import InstanceError
from fairbandits.models import (
    UNIT, BanditInstance, BoolVector, ClassicArm, ContextualArm, RealVector,
)

MAX_CONJUNCTION_DIM = 16


# Lower-bound prior

@dataclass(frozen=True)
class LowerBoundDraw:
    k: int
    means: tuple
    coins: tuple

    def instance(self, seed=None):
        return BanditInstance(
            arms=tuple(ClassicArm(mu) for mu in self.means), family='lower_bound', seed=seed)


def lower_bound_means(k, arm):
    """The (low, high) candidate means of a 0-based arm."""
    i = arm + 1
    return 1.0 / 3.0 + i / (3.0 * k), 1.0 / 3.0 + (i + 1) / (3.0 * k)


def sample_lower_bound_instance(k, rng):
    if k < 2:
        raise InstanceError(f"The lower-bound prior needs k >= 2, got {k}")
    coins = tuple(rng.bernoulli(0.5) for _ in range(k))
    means = tuple(lower_bound_means(k, arm)[coin] for arm, coin in enumerate(coins))
    return LowerBoundDraw(k=k, means=means, coins=coins)


@dataclass(frozen=True)
class PosteriorQuery:
    k: int
    p: float
    s: int
    m: int

    def __post_init__(self):
        if not 0 <= self.s <= self.m:
            raise InstanceError(f"Need 0 <= s <= m, got s={self.s}, m={self.m}")


def log_posterior_odds(q):
    """log X where X is the odds of the high mean p + 1/(3k) against p."""
    gap = 1.0 / (3.0 * q.k)
    if not (0 < q.p < 1 and 0 < q.p + gap < 1):
        raise InstanceError(f"Degenerate mean p={q.p} for k={q.k}")
    up = math.log1p(gap / q.p)
    down = math.log1p(-gap / (1.0 - q.p))
    return q.s * up + (q.m - q.s) * down


def posterior_odds(q):
    return math.exp(log_posterior_odds(q))


def is_distinguished(odds, delta):
    """True when one of the two candidate means carries posterior mass >= 1 - delta."""
    return odds >= (1.0 - delta) / delta or odds <= delta / (1.0 - delta)


def distinguishing_time(k, delta, rng, arm=None, block=4096, max_observations=10 ** 8):
    """
    Observations of one arm's reward stream until the posterior odds
    distinguish its two candidate means at level sqrt(2 * delta).

    The arm's true mean is drawn from the prior; the stream is simulated in
    blocks and the odds are tracked in log space.
    """
    arm = k // 2 if arm is None else arm
    low, high = lower_bound_means(k, arm)
    mu = high if rng.bernoulli(0.5) else low
    level = math.sqrt(2.0 * delta)
    upper = math.log((1.0 - level) / level)
    lower = -upper
    gap = 1.0 / (3.0 * k)
    up = math.log1p(gap / low)
    down = math.log1p(-gap / (1.0 - low))

    generator = rng.generator
    successes = 0
    seen = 0
    while seen < max_observations:
        draws = generator.random(block) < mu
        s = successes + np.cumsum(draws)
        m = seen + np.arange(1, block + 1)
        log_odds = s * up + (m - s) * down
        hits = np.flatnonzero((log_odds >= upper) | (log_odds <= lower))
        if hits.size:
            return int(m[hits[0]])
        successes = int(s[-1])
        seen += block
    raise InstanceError(f"Arm {arm} was not distinguished within {max_observations} observations")


def median_distinguishing_time(k, delta, streams, rng):
    return float(np.median([distinguishing_time(k, delta, rng.child(i)) for i in range(streams)]))


# Conjunctions

def adversarial_conjunction_sequence(d):
    """Every non-all-ones point of {0,1}^d by Hamming weight, labelled 0."""
    if not 2 <= d <= MAX_CONJUNCTION_DIM:
        raise InstanceError(f"Adversarial sequence needs 2 <= d <= {MAX_CONJUNCTION_DIM}, got {d}")
    points = [tuple((n >> (d - 1 - m)) & 1 for m in range(d)) for n in range((1 << d) - 1)]
    points.sort(key=lambda x: (sum(x), x))
    return [(BoolVector(x), 0.0) for x in points]


def make_conjunction_instance(d, k, rng, max_variables=3, reward_model='noiseless'):
    """k random conjunctions of 1 to max_variables variables each."""
    if d < 1 or k < 1:
        raise InstanceError(f"Need d >= 1 and k >= 1, got d={d}, k={k}")
    arms = []
    for _ in range(k):
        size = 1 + rng.integers(min(max_variables, d))
        variables = rng.generator.choice(d, size=size, replace=False)
        arms.append(ContextualArm('conjunction', tuple(int(m) for m in variables), d))
    return BanditInstance(arms=tuple(arms), family='conjunction', reward_model=reward_model)


# Linear

def unit_ball_point(d, rng):
    direction = rng.generator.standard_normal(d)
    norm = np.linalg.norm(direction)
    if norm == 0:
        return np.zeros(d)
    radius = rng.random() ** (1.0 / d)
    point = direction / norm * radius
    # guard against rounding pushing the norm past 1
    return point / max(1.0, float(np.linalg.norm(point)))


def make_linear_instance(d, k, rng, reward_model='noiseless'):
    """Arms with theta drawn uniformly from the unit ball; payoff (<theta, x> + 1) / 2."""
    if d < 1 or k < 1:
        raise InstanceError(f"Need d >= 1 and k >= 1, got d={d}, k={k}")
    arms = tuple(
        ContextualArm('linear', tuple(float(a) for a in unit_ball_point(d, rng)), d) for _ in range(k))
    return BanditInstance(arms=arms, family='linear', reward_model=reward_model)


LINEAR_LINK = (0.5, 0.5)


# Dial

def make_dial_instance(target=None):
    """Two arms: the target (a fair coin by default) and the dial f(x) = x[0]."""
    target = ClassicArm(0.5) if target is None else target
    return BanditInstance(arms=(target, ContextualArm('dial', (), 1)), family='dial')


def make_bernoulli_instance(means, seed=None):
    return BanditInstance(arms=tuple(ClassicArm(mu) for mu in means), family='bernoulli', seed=seed)


# Context streams

class UnitStream:
    """Classic setting: every arm sees the empty context."""

    def __init__(self, k):
        self.k = k

    def draw(self, rng):
        return (UNIT,) * self.k


class UnitBallStream:
    def __init__(self, d, k):
        self.d = d
        self.k = k

    def draw(self, rng):
        return tuple(RealVector(tuple(unit_ball_point(self.d, rng))) for _ in range(self.k))


class BooleanStream:
    """Independent Bernoulli(p_one) bits per arm and variable."""

    def __init__(self, d, k, p_one=0.7):
        self.d = d
        self.k = k
        self.p_one = p_one

    def draw(self, rng):
        bits = rng.generator.random((self.k, self.d)) < self.p_one
        return tuple(BoolVector(tuple(int(b) for b in row)) for row in bits)


def context_stream_for(instance):
    """Default context stream for an instance's family."""
    first = instance.arms[0]
    if instance.is_classic:
        return UnitStream(instance.k)
    if first.family == 'conjunction':
        return BooleanStream(first.dimension, instance.k)
    return UnitBallStream(first.dimension, instance.k)
