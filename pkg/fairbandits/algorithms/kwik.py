"""
KWIK ("knows what it knows") learners.

A learner either predicts a value it is confident is within epsilon of the
truth or answers DONT_KNOW, in which case it expects the label as feedback.
Learners accept feedback at any time; extra feedback only narrows what they
consider possible.
"""
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from fairbandits.exceptions import LearnerError
from fairbandits.models import BoolVector, RealVector, Unit

logger = logging.getLogger(__name__)

SPAN_TOLERANCE = 1e-9
DEFAULT_MAX_ENUM_DIM = 16


@dataclass(frozen=True)
class Prediction:
    value: float = None

    def __post_init__(self):
        if self.value is not None and not 0.0 <= self.value <= 1.0:
            raise LearnerError(f"Prediction must be in [0, 1], got {self.value}")

    @property
    def dont_know(self):
        return self.value is None

    @classmethod
    def of(cls, value):
        return cls(min(max(float(value), 0.0), 1.0))


DONT_KNOW = Prediction()


@dataclass
class KwikBudget:
    epsilon: float
    delta: float
    bound: int
    dont_know_count: int = 0

    @property
    def exceeded(self):
        return self.dont_know_count > self.bound


class KwikLearner(ABC):
    context_type = None

    def check_context(self, x):
        if not isinstance(x, self.context_type):
            raise LearnerError(
                f"{type(self).__name__} expects {self.context_type.__name__}, got {type(x).__name__}")

    @abstractmethod
    def predict(self, x):
        """Return a Prediction for context x."""

    @abstractmethod
    def feedback(self, x, y):
        """Absorb the label y observed on context x."""

    @abstractmethod
    def kwik_bound(self):
        """Maximum number of DONT_KNOW answers in a valid run."""


class BernoulliMeanLearner(KwikLearner):
    """Hoeffding-interval learner for a single unknown mean."""
    context_type = Unit

    def __init__(self, epsilon, delta):
        if not 0 < delta < 1:
            raise LearnerError(f"delta must be in (0, 1), got {delta}")
        if epsilon <= 0:
            raise LearnerError(f"epsilon must be positive, got {epsilon}")
        self.epsilon = epsilon
        self.delta = delta
        self.total = 0.0
        self.count = 0

    @property
    def mean(self):
        return self.total / self.count if self.count else 0.5

    def predict(self, x):
        self.check_context(x)
        return bernoulli_mean_rule(self, self.epsilon, self.delta)

    def feedback(self, x, y):
        self.total += float(y)
        self.count += 1

    def kwik_bound(self):
        return math.ceil(math.log(2.0 / self.delta) / (2.0 * self.epsilon ** 2))


class NoiselessLinearLearner(KwikLearner):
    """
    Span learner for noiseless linear payoffs.

    Payoffs are link(v) = scale * v + offset with v = <theta, x>. Labels are
    mapped back through the link before they are stored.
    """
    context_type = RealVector

    def __init__(self, d, scale=1.0, offset=0.0):
        if d < 1:
            raise LearnerError(f"Dimension must be >= 1, got {d}")
        if scale == 0:
            raise LearnerError("Link scale cannot be zero")
        self.d = d
        self.scale = scale
        self.offset = offset
        self.basis = []
        self.labels = []

    @property
    def rank(self):
        return len(self.basis)

    def check_context(self, x):
        super().check_context(x)
        if x.dimension != self.d:
            raise LearnerError(f"Context dimension {x.dimension} does not match learner dimension {self.d}")

    def predict(self, x):
        self.check_context(x)
        return noiseless_linear_rule(self, x)

    def feedback(self, x, y):
        self.check_context(x)
        if span_coefficients(self, x.as_array()) is None:
            self.basis.append(x.as_array())
            self.labels.append((float(y) - self.offset) / self.scale)

    def kwik_bound(self):
        return self.d


class ConjunctionEnumLearner(KwikLearner):
    """Version-space learner over all conjunctions of d boolean variables."""
    context_type = BoolVector

    def __init__(self, d, max_dim=DEFAULT_MAX_ENUM_DIM):
        if not 1 <= d <= max_dim:
            raise LearnerError(f"Conjunction enumeration supports 1 <= d <= {max_dim}, got {d}")
        self.d = d
        # bit m of a mask set means variable m is in the conjunction
        self.version_space = list(range(1 << d))

    def check_context(self, x):
        super().check_context(x)
        if x.dimension != self.d:
            raise LearnerError(f"Context dimension {x.dimension} does not match learner dimension {self.d}")

    def variable_sets(self):
        return {frozenset(m for m in range(self.d) if mask >> m & 1) for mask in self.version_space}

    def predict(self, x):
        self.check_context(x)
        return enum_conjunction_rule(self, x)

    def feedback(self, x, y):
        self.check_context(x)
        label = 1 if y >= 0.5 else 0
        ones = x.mask
        self.version_space = [
            mask for mask in self.version_space if int((mask & ~ones) == 0) == label
        ]

    def kwik_bound(self):
        return (1 << self.d) - 1


def bernoulli_mean_rule(state, epsilon, delta_alloc):
    if state.count == 0:
        return DONT_KNOW
    radius = math.sqrt(math.log(2.0 / delta_alloc) / (2.0 * state.count))
    if radius <= epsilon:
        return Prediction.of(state.mean)
    return DONT_KNOW


def span_coefficients(state, vector):
    """Coefficients expressing vector in the stored basis, or None if outside its span."""
    if not state.basis:
        return np.zeros(0) if np.linalg.norm(vector) <= SPAN_TOLERANCE else None
    basis = np.array(state.basis)
    coefficients, _, rank, _ = np.linalg.lstsq(basis.T, vector, rcond=None)
    if rank < len(state.basis):
        logger.warning(f"Rank-deficient span solve: rank {rank} for {len(state.basis)} basis vectors")
    residual = np.linalg.norm(basis.T @ coefficients - vector)
    if residual > SPAN_TOLERANCE:
        return None
    return coefficients


def noiseless_linear_rule(state, x):
    coefficients = span_coefficients(state, x.as_array())
    if coefficients is None:
        return DONT_KNOW
    raw = float(coefficients @ np.asarray(state.labels)) if state.labels else 0.0
    return Prediction.of(state.scale * raw + state.offset)


def enum_conjunction_rule(state, x):
    ones = x.mask
    seen = set()
    for mask in state.version_space:
        seen.add(int((mask & ~ones) == 0))
        if len(seen) == 2:
            return DONT_KNOW
    if not seen:
        raise LearnerError("Version space is empty; feedback was not generated by a conjunction")
    return Prediction.of(seen.pop())


def kwik_predict(learner, budget, x):
    prediction = learner.predict(x)
    if prediction.dont_know:
        budget.dont_know_count += 1
    return prediction


def kwik_feedback(learner, x, y):
    learner.feedback(x, y)
    return learner


# KWIK bound handles m(epsilon, delta) used to tune the reduction.

class HoeffdingBound:
    """m(eps, delta) = ceil(ln(2/delta) / (2 eps^2))"""

    def __call__(self, epsilon, delta):
        if epsilon <= 0 or not 0 < delta < 1:
            raise LearnerError(f"Bound undefined at epsilon={epsilon}, delta={delta}")
        return math.ceil(math.log(2.0 / delta) / (2.0 * epsilon ** 2))

    def crossover(self, horizon, k, delta):
        """Solve eps * T = k * ln(2/delta) / (2 eps^2) for eps."""
        c = math.log(2.0 / delta) / 2.0
        return (k * c / horizon) ** (1.0 / 3.0)


class ConstantBound:
    """m(eps, delta) = value, independent of both arguments."""

    def __init__(self, value):
        self.value = value

    def __call__(self, epsilon, delta):
        if epsilon <= 0:
            raise LearnerError(f"Bound undefined at epsilon={epsilon}")
        return self.value

    def crossover(self, horizon, k, delta):
        return k * self.value / horizon


def make_learner(name, epsilon, delta, d=None, link=(1.0, 0.0), max_dim=DEFAULT_MAX_ENUM_DIM):
    """Build a registered learner by name."""
    if name == 'bernoulli_mean':
        return BernoulliMeanLearner(epsilon, delta)
    if name == 'noiseless_linear':
        return NoiselessLinearLearner(d, *link)
    if name == 'enum_conjunction':
        return ConjunctionEnumLearner(d, max_dim=max_dim)
    raise LearnerError(f"Unknown learner '{name}'")


def learner_bound(name, d=None):
    """The KWIK bound handle matching make_learner(name, ...)."""
    if name == 'bernoulli_mean':
        return HoeffdingBound()
    if name == 'noiseless_linear':
        return ConstantBound(d)
    if name == 'enum_conjunction':
        return ConstantBound((1 << d) - 1)
    raise LearnerError(f"Unknown learner '{name}'")


LEARNERS = ('bernoulli_mean', 'noiseless_linear', 'enum_conjunction')
