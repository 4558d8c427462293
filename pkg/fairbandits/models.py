"""
Core domain types shared by every algorithm, the auditor and the harness.

Arms are indexed from 0. Contexts are immutable values so they can be used
as dictionary keys by the contextual fair algorithms.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from fairbandits.exceptions import InstanceError, TraceError

PROB_TOLERANCE = 1e-12
NORM_TOLERANCE = 1e-12

REWARD_MODELS = ('bernoulli', 'noiseless')


# Contexts

@dataclass(frozen=True)
class Unit:
    """The empty context of the classic (non-contextual) setting."""

    def to_json(self):
        return None


UNIT = Unit()


@dataclass(frozen=True)
class RealVector:
    entries: tuple

    def __post_init__(self):
        values = tuple(float(v) for v in self.entries)
        if not all(math.isfinite(v) for v in values):
            raise InstanceError(f"Context entries must be finite, got {values}")
        norm = math.sqrt(math.fsum(v * v for v in values))
        if norm > 1.0 + NORM_TOLERANCE:
            raise InstanceError(f"Context norm must be at most 1, got {norm:.6g}")
        object.__setattr__(self, 'entries', values)

    @property
    def dimension(self):
        return len(self.entries)

    def as_array(self):
        return np.asarray(self.entries, dtype=float)

    def to_json(self):
        return list(self.entries)


@dataclass(frozen=True)
class BoolVector:
    entries: tuple

    def __post_init__(self):
        values = tuple(int(v) for v in self.entries)
        if any(v not in (0, 1) for v in values):
            raise InstanceError(f"Boolean context entries must be 0 or 1, got {self.entries}")
        object.__setattr__(self, 'entries', values)

    @property
    def dimension(self):
        return len(self.entries)

    @property
    def mask(self):
        """Bitmask with bit m set when variable m is 1."""
        result = 0
        for m, v in enumerate(self.entries):
            if v:
                result |= 1 << m
        return result

    def to_json(self):
        return list(self.entries)


# Payoff families

def _linear_payoff(params, context):
    # <theta, x> lies in [-1, 1]; map it into [0, 1]
    v = sum(a * b for a, b in zip(params, context.entries))
    return min(max((v + 1.0) / 2.0, 0.0), 1.0)


def _conjunction_payoff(params, context):
    return 1.0 if all(context.entries[m] == 1 for m in params) else 0.0


def _dial_payoff(params, context):
    return min(max(context.entries[0], 0.0), 1.0)


# name -> (payoff function, context type). Module level so instances pickle.
PAYOFF_FAMILIES = {
    'linear': (_linear_payoff, RealVector),
    'conjunction': (_conjunction_payoff, BoolVector),
    'dial': (_dial_payoff, RealVector),
}


@dataclass(frozen=True)
class ClassicArm:
    mean: float

    def __post_init__(self):
        mean = float(self.mean)
        if not 0.0 <= mean <= 1.0:
            raise InstanceError(f"Arm mean must be in [0, 1], got {self.mean}")
        object.__setattr__(self, 'mean', mean)

    context_type = Unit

    def value(self, context):
        if not isinstance(context, Unit):
            raise InstanceError(f"Classic arm expects no context, got {type(context).__name__}")
        return self.mean

    def to_dict(self):
        return {'type': 'classic', 'mean': self.mean}


@dataclass(frozen=True)
class ContextualArm:
    family: str
    params: tuple
    dimension: int

    def __post_init__(self):
        if self.family not in PAYOFF_FAMILIES:
            raise InstanceError(f"Unknown payoff family '{self.family}'")
        object.__setattr__(self, 'params', tuple(self.params))
        if self.family == 'linear':
            if len(self.params) != self.dimension:
                raise InstanceError(
                    f"Linear arm needs {self.dimension} coefficients, got {len(self.params)}")
            norm = math.sqrt(math.fsum(float(a) ** 2 for a in self.params))
            if norm > 1.0 + NORM_TOLERANCE:
                raise InstanceError(f"Linear arm coefficients must have norm at most 1, got {norm:.6g}")
        elif self.family == 'conjunction':
            if any(not 0 <= m < self.dimension for m in self.params):
                raise InstanceError(
                    f"Conjunction variables {self.params} out of range for dimension {self.dimension}")
            object.__setattr__(self, 'params', tuple(sorted(set(self.params))))

    @property
    def context_type(self):
        return PAYOFF_FAMILIES[self.family][1]

    def value(self, context):
        payoff, context_type = PAYOFF_FAMILIES[self.family]
        if not isinstance(context, context_type):
            raise InstanceError(
                f"{self.family} arm expects {context_type.__name__}, got {type(context).__name__}")
        if context.dimension != self.dimension:
            raise InstanceError(
                f"Context dimension {context.dimension} does not match arm dimension {self.dimension}")
        return payoff(self.params, context)

    def to_dict(self):
        return {'type': self.family, 'params': list(self.params), 'dimension': self.dimension}


def arm_from_dict(data):
    if data['type'] == 'classic':
        return ClassicArm(data['mean'])
    return ContextualArm(data['type'], tuple(data['params']), int(data['dimension']))


@dataclass(frozen=True)
class BanditInstance:
    """Ground truth for simulation and auditing."""
    arms: tuple
    family: str = 'bernoulli'
    reward_model: str = 'bernoulli'
    seed: int = None

    def __post_init__(self):
        object.__setattr__(self, 'arms', tuple(self.arms))
        if not self.arms:
            raise InstanceError("An instance needs at least one arm")
        if self.reward_model not in REWARD_MODELS:
            raise InstanceError(f"Unknown reward model '{self.reward_model}'")

    @property
    def k(self):
        return len(self.arms)

    def check_arm(self, arm):
        if not 0 <= arm < self.k:
            raise InstanceError(f"Arm {arm} out of range for k={self.k}")

    def value(self, arm, context):
        self.check_arm(arm)
        return self.arms[arm].value(context)

    def values(self, contexts):
        if len(contexts) != self.k:
            raise InstanceError(f"Expected {self.k} contexts, got {len(contexts)}")
        return [arm.value(x) for arm, x in zip(self.arms, contexts)]

    @property
    def is_classic(self):
        return all(isinstance(arm, ClassicArm) for arm in self.arms)

    @property
    def means(self):
        return [arm.mean for arm in self.arms] if self.is_classic else None

    def context_from_json(self, arm, raw):
        """Rebuild an arm's context from its JSON encoding."""
        context_type = self.arms[arm].context_type
        if context_type is Unit:
            return UNIT
        return context_type(tuple(raw))

    def to_dict(self):
        data = {'k': self.k, 'family': self.family, 'reward_model': self.reward_model}
        if self.is_classic:
            data['means'] = self.means
        elif self.family == 'linear':
            data['thetas'] = [list(arm.params) for arm in self.arms]
        elif self.family == 'conjunction':
            data['conjunctions'] = [list(arm.params) for arm in self.arms]
        data['arms'] = [arm.to_dict() for arm in self.arms]
        data['seed'] = self.seed
        return data

    @classmethod
    def from_dict(cls, data):
        return cls(
            arms=tuple(arm_from_dict(a) for a in data['arms']),
            family=data.get('family', 'bernoulli'),
            reward_model=data.get('reward_model', 'bernoulli'),
            seed=data.get('seed'),
        )


# Distributions and traces

@dataclass(frozen=True)
class ArmDistribution:
    probs: tuple

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probs)
        if not probs:
            raise TraceError("A distribution needs at least one arm")
        if any(not (-PROB_TOLERANCE <= p <= 1.0 + PROB_TOLERANCE) for p in probs):
            raise TraceError(f"Probabilities must lie in [0, 1], got {probs}")
        if abs(math.fsum(probs) - 1.0) > PROB_TOLERANCE:
            raise TraceError(f"Probabilities must sum to 1, got {math.fsum(probs)!r}")
        object.__setattr__(self, 'probs', probs)

    @classmethod
    def uniform(cls, k, support=None):
        arms = sorted(range(k) if support is None else support)
        if not arms:
            raise TraceError("Cannot build a uniform distribution over no arms")
        share = 1.0 / len(arms)
        probs = [0.0] * k
        for arm in arms:
            probs[arm] = share
        return cls(tuple(probs))

    @classmethod
    def point_mass(cls, k, arm):
        probs = [0.0] * k
        probs[arm] = 1.0
        return cls(tuple(probs))

    @property
    def k(self):
        return len(self.probs)

    @property
    def support(self):
        return frozenset(j for j, p in enumerate(self.probs) if p > 0.0)

    def sample(self, rng):
        """Draw an arm by inverting the cumulative distribution."""
        u = rng.random()
        cumulative = 0.0
        last = None
        for arm, p in enumerate(self.probs):
            if p <= 0.0:
                continue
            last = arm
            cumulative += p
            if u < cumulative:
                return arm
        return last


@dataclass(frozen=True)
class RoundTrace:
    t: int
    contexts: tuple
    distribution: ArmDistribution
    chosen: int
    reward: float
    predictions: tuple = None

    def __post_init__(self):
        object.__setattr__(self, 'contexts', tuple(self.contexts))
        if not 0 <= self.chosen < self.distribution.k:
            raise TraceError(f"Chosen arm {self.chosen} out of range")
        if self.chosen not in self.distribution.support:
            raise TraceError(f"Round {self.t}: chosen arm {self.chosen} had zero probability")
        if not 0.0 <= self.reward <= 1.0:
            raise TraceError(f"Round {self.t}: reward {self.reward} outside [0, 1]")


def append_round(trace, row):
    """Append row to trace in place and return the trace."""
    if row.t != len(trace) + 1:
        raise TraceError(f"Expected round {len(trace) + 1}, got {row.t}")
    trace.append(row)
    return trace


# Randomness

@dataclass
class Rng:
    """Seeded generator; substreams are keyed by (seed, spawn key)."""
    seed: int
    spawn_key: tuple = ()
    _generator: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        self.seed = int(self.seed)
        self.spawn_key = tuple(int(i) for i in self.spawn_key)
        sequence = np.random.SeedSequence(self.seed, spawn_key=self.spawn_key)
        self._generator = np.random.default_rng(sequence)

    @classmethod
    def for_trial(cls, seed, trial):
        return cls(seed, (trial,))

    def child(self, index):
        return Rng(self.seed, self.spawn_key + (index,))

    @property
    def generator(self):
        return self._generator

    def random(self):
        return float(self._generator.random())

    def bernoulli(self, p):
        return 1 if self._generator.random() < p else 0

    def integers(self, n):
        return int(self._generator.integers(n))


def sample_reward(instance, arm, context, rng):
    """Draw the reward of pulling arm on context."""
    value = instance.value(arm, context)
    if instance.reward_model == 'noiseless':
        return float(value)
    return float(rng.bernoulli(value))
