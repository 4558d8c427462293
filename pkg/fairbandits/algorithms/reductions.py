"""
Reductions between fair contextual bandits and KWIK learning.

KwikToFair runs one KWIK learner per arm and plays uniformly over the arms
chained to the best prediction, or uniformly over all arms as soon as any
learner abstains. FairToKwik turns a fair algorithm that answers pure
distribution queries into a KWIK learner by probing it against a dial arm
whose payoff can be set to any multiple of epsilon.
"""
import logging
import math
from dataclasses import dataclass, field

from fairbandits.algorithms.classic_fair import (
    ConfidenceInterval, FairBanditsReplay, chained_set, confidence_radius, top_arm,
)
from fairbandits.algorithms.kwik import DONT_KNOW, Prediction
from fairbandits.exceptions import LearnerError, ReductionError
from fairbandits.models import ArmDistribution, RealVector, RoundTrace, append_round, sample_reward

logger = logging.getLogger(__name__)

TIE_TOLERANCE = 1e-12
OBJECTIVE_TOLERANCE = 1e-9
GRID_DEPTH = 60


def compute_kwik_to_fair_params(horizon, k, delta, bound):
    """
    Return (epsilon_star, delta_star) for a run of the given horizon.

    epsilon_star minimizes max(eps * T, k * m(eps, delta_star)) over the
    grid {2^-i} plus the closed-form crossover when bound provides one. Among
    minimizers the largest epsilon is kept, so a flat bound yields k*m/T.
    """
    if horizon < 1 or k < 1:
        raise ReductionError(f"Need horizon >= 1 and k >= 1, got T={horizon}, k={k}")
    if not 0 < delta < 1:
        raise ReductionError(f"delta must be in (0, 1), got {delta}")
    delta_star = min(delta, 1.0 / horizon) / (k * horizon ** 2)

    candidates = {2.0 ** -i for i in range(GRID_DEPTH + 1)}
    crossover = getattr(bound, 'crossover', None)
    if crossover is not None:
        point = crossover(horizon, k, delta_star)
        if 0 < point <= 1:
            candidates.add(point)

    scored = []
    for epsilon in sorted(candidates):
        try:
            m = bound(epsilon, delta_star)
        except LearnerError as e:
            raise ReductionError(f"KWIK bound rejected epsilon={epsilon}: {e}") from e
        scored.append((max(epsilon * horizon, k * m), epsilon))
    best = min(score for score, _ in scored)
    epsilon_star = max(eps for score, eps in scored if score <= best * (1 + OBJECTIVE_TOLERANCE))
    return epsilon_star, delta_star


@dataclass
class KwikToFairState:
    learners: list
    epsilon_star: float
    delta_star: float
    horizon: int
    t: int = 1
    dont_know_rounds: int = 0
    dont_know_pulls: list = field(default_factory=list)

    @property
    def k(self):
        return len(self.learners)

    @classmethod
    def build(cls, k, horizon, delta, learner_factory, bound):
        """learner_factory(epsilon, delta) must return a fresh KwikLearner."""
        epsilon_star, delta_star = compute_kwik_to_fair_params(horizon, k, delta, bound)
        learners = [learner_factory(epsilon_star, delta_star) for _ in range(k)]
        return cls(learners, epsilon_star, delta_star, horizon, dont_know_pulls=[0] * k)


@dataclass(frozen=True)
class KwikToFairRound:
    distribution: ArmDistribution
    chosen: int
    predictions: tuple

    @property
    def abstained(self):
        return any(p.dont_know for p in self.predictions)


def kwik_to_fair_round(state, contexts, rng):
    if state.t > state.horizon:
        raise ReductionError(f"Round {state.t} is past the horizon {state.horizon}")
    if len(contexts) != state.k:
        raise ReductionError(f"Expected {state.k} contexts, got {len(contexts)}")
    predictions = tuple(learner.predict(x) for learner, x in zip(state.learners, contexts))
    if any(p.dont_know for p in predictions):
        distribution = ArmDistribution.uniform(state.k)
    else:
        eps = state.epsilon_star
        intervals = {
            j: ConfidenceInterval(p.value - eps, p.value + eps) for j, p in enumerate(predictions)
        }
        distribution = ArmDistribution.uniform(
            state.k, chained_set(intervals, top_arm(intervals), closed=False))
    return KwikToFairRound(distribution, distribution.sample(rng), predictions)


def kwik_to_fair_feedback(state, played, contexts, reward):
    """Feed the pulled arm's learner; every other learner is left untouched."""
    arm = played.chosen
    state.learners[arm].feedback(contexts[arm], reward)
    if played.abstained:
        state.dont_know_rounds += 1
    if played.predictions[arm].dont_know:
        state.dont_know_pulls[arm] += 1
    state.t += 1
    return state


class KwikToFair:
    name = 'kwik_to_fair'

    def __init__(self, k, horizon, delta, learner_factory, bound):
        self.state = KwikToFairState.build(k, horizon, delta, learner_factory, bound)
        self._played = None
        logger.debug(
            f"KwikToFair tuned to epsilon*={self.state.epsilon_star:.6g}, delta*={self.state.delta_star:.3g}")

    def select(self, contexts, rng):
        self._played = kwik_to_fair_round(self.state, contexts, rng)
        return self._played.distribution, self._played.chosen

    def observe(self, arm, contexts, reward):
        kwik_to_fair_feedback(self.state, self._played, contexts, reward)

    def predictions(self):
        return tuple(p.value for p in self._played.predictions)

    @property
    def dont_know_count(self):
        return self.state.dont_know_rounds


# Doubling trick

@dataclass(frozen=True)
class EpochPlan:
    epoch: int
    start: int
    horizon: int
    delta: float

    @property
    def end(self):
        return self.start + self.horizon - 1


def epoch_of_round(t):
    """Epoch E covers rounds 2^E - 1 through 2^(E+1) - 2."""
    if t < 1:
        raise ReductionError(f"Round index must be >= 1, got {t}")
    return (t + 1).bit_length() - 1


def epoch_schedule(epoch, delta):
    if epoch < 1:
        raise ReductionError(f"Epochs are numbered from 1, got {epoch}")
    return EpochPlan(
        epoch=epoch,
        start=2 ** epoch - 1,
        horizon=2 ** epoch,
        delta=6.0 * delta / (math.pi * epoch) ** 2,
    )


class DoublingKwikToFair:
    """KwikToFair restarted with fresh learners on epochs of doubling length."""
    name = 'kwik_to_fair_doubling'

    def __init__(self, k, delta, learner_factory, bound):
        self.k = k
        self.delta = delta
        self.learner_factory = learner_factory
        self.bound = bound
        self.t = 1
        self.plan = None
        self.inner = None
        self._closed_dont_know = 0

    def _enter_epoch(self):
        epoch = epoch_of_round(self.t)
        if self.plan is None or self.plan.epoch != epoch:
            if self.inner is not None:
                self._closed_dont_know += self.inner.dont_know_count
            self.plan = epoch_schedule(epoch, self.delta)
            self.inner = KwikToFair(
                self.k, self.plan.horizon, self.plan.delta, self.learner_factory, self.bound)
            logger.debug(f"Epoch {epoch} starts at round {self.t} with delta={self.plan.delta:.3g}")

    def select(self, contexts, rng):
        self._enter_epoch()
        return self.inner.select(contexts, rng)

    def observe(self, arm, contexts, reward):
        self.inner.observe(arm, contexts, reward)
        self.t += 1

    def predictions(self):
        return self.inner.predictions()

    @property
    def dont_know_count(self):
        current = self.inner.dont_know_count if self.inner is not None else 0
        return self._closed_dont_know + current


def kwik_to_fair_doubling(instance, stream, delta, learner_factory, bound, rounds, rng):
    """Run the doubling construction for a number of rounds and return its trace."""
    policy = DoublingKwikToFair(instance.k, delta, learner_factory, bound)
    context_rng = rng.child(0)
    play_rng = rng.child(1)
    trace = []
    for t in range(1, rounds + 1):
        contexts = stream.draw(context_rng)
        distribution, chosen = policy.select(contexts, play_rng)
        reward = sample_reward(instance, chosen, contexts[chosen], play_rng)
        policy.observe(chosen, contexts, reward)
        append_round(trace, RoundTrace(t, contexts, distribution, chosen, reward, policy.predictions()))
    return trace


# Pure fair queries

class ContextualFairBandits:
    """
    Chained confidence intervals kept per (arm, context) pair.

    Every query rebuilds the intervals for the queried contexts from the
    history and chains them afresh, so the answer depends on (history,
    contexts) alone.
    """

    def __init__(self, k, delta):
        self.k = k
        self.delta = delta
        self._stats = {}
        self._synced = 0
        self._last_row = None

    def _sync(self, history):
        if self._synced > len(history) or (
                self._synced and history[self._synced - 1] is not self._last_row):
            self._stats = {}
            self._synced = 0
        for row in history[self._synced:]:
            key = (row.chosen, row.contexts[row.chosen])
            total, count, _ = self._stats.get(key, (0.0, 0, 1))
            self._stats[key] = (total + row.reward, count + 1, row.t + 1)
            self._last_row = row
        self._synced = len(history)

    def interval(self, arm, context):
        total, count, tau = self._stats.get((arm, context), (0.0, 0, 1))
        if count == 0:
            return ConfidenceInterval()
        mean = total / count
        radius = confidence_radius(tau, count, self.delta)
        return ConfidenceInterval(mean - radius, mean + radius)

    def distribution(self, history, contexts):
        if len(contexts) != self.k:
            raise ReductionError(f"Expected {self.k} contexts, got {len(contexts)}")
        self._sync(history)
        intervals = {j: self.interval(j, x) for j, x in enumerate(contexts)}
        return ArmDistribution.uniform(self.k, chained_set(intervals, top_arm(intervals)))


FAIR_QUERY_ALGORITHMS = {
    'contextual_fair_bandits': ContextualFairBandits,
    'fair_bandits_replay': FairBanditsReplay,
}


def fair_query(fair_alg, history, contexts):
    """Distribution the fair algorithm would play; never changes the history."""
    return fair_alg.distribution(history, tuple(contexts))


def dial_context(value):
    return RealVector((min(value, 1.0),))


@dataclass
class FairToKwikState:
    fair_alg: object
    epsilon: float
    epsilon_star: float
    delta_star: float
    horizon: int
    dial_values: list
    boolean: bool = False
    history: list = field(default_factory=list)
    t: int = 1
    dont_know_count: int = 0

    @property
    def dial_contexts(self):
        return [dial_context(v) for v in self.dial_values]

    @classmethod
    def build(cls, epsilon, delta, horizon, fair_alg_factory=ContextualFairBandits, boolean=False):
        """
        fair_alg_factory(k, delta) builds the wrapped two-arm fair algorithm.

        With boolean=True the target class is 0/1 valued: the dial has the two
        levels 0 and 1 and epsilon is ignored.
        """
        if not 0 < delta < 1:
            raise ReductionError(f"delta must be in (0, 1), got {delta}")
        if horizon < 1:
            raise ReductionError(f"horizon must be >= 1, got {horizon}")
        if boolean:
            epsilon, epsilon_star = 0.0, 1.0
            delta_star = delta / (2.0 * horizon)
            levels = 1
        else:
            if not 0 < epsilon <= 1:
                raise ReductionError(f"epsilon must be in (0, 1], got {epsilon}")
            epsilon_star = epsilon / 2.0
            delta_star = delta * epsilon_star / horizon
            levels = math.ceil(1.0 / epsilon_star - OBJECTIVE_TOLERANCE)
        dial_values = [min(level * epsilon_star, 1.0) for level in range(levels + 1)]
        return cls(
            fair_alg=fair_alg_factory(2, delta_star),
            epsilon=epsilon,
            epsilon_star=epsilon_star,
            delta_star=delta_star,
            horizon=horizon,
            dial_values=dial_values,
            boolean=boolean,
        )


def fair_to_kwik_step(state, x, label_source, rng):
    """
    Predict the target's value on x by probing the fair algorithm.

    label_source(x) returns the (possibly noisy) label and is only called on
    rounds that end in DONT_KNOW and pull the target arm.
    """
    if state.t > state.horizon:
        raise ReductionError(f"Round {state.t} is past the horizon {state.horizon}")
    dials = state.dial_contexts
    distributions = [fair_query(state.fair_alg, state.history, (x, dial)) for dial in dials]
    ties = [
        level for level, dist in enumerate(distributions)
        if abs(dist.probs[0] - dist.probs[1]) <= TIE_TOLERANCE
    ]
    state.t += 1

    if len(ties) >= 2:
        level = ties[rng.integers(len(ties))]
        distribution = distributions[level]
        arm = distribution.sample(rng)
        reward = float(label_source(x)) if arm == 0 else state.dial_values[level]
        row = RoundTrace(len(state.history) + 1, (x, dials[level]), distribution, arm, reward)
        append_round(state.history, row)
        state.dont_know_count += 1
        return DONT_KNOW

    preferred = [
        level for level, dist in enumerate(distributions)
        if dist.probs[0] > dist.probs[1] + TIE_TOLERANCE
    ]
    if state.boolean:
        return Prediction.of(1.0 if 0 in preferred else 0.0)
    if not preferred:
        return Prediction.of(0.0)
    return Prediction.of(state.dial_values[max(preferred)])
