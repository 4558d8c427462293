"""Unfair comparison policies: UCB1, uniform play and ConjunctionBandit."""
import math
from dataclasses import dataclass, field

from fairbandits.exceptions import AlgorithmError, InstanceError
from fairbandits.models import ArmDistribution, BoolVector


@dataclass
class UcbState:
    k: int
    t: int = 1
    means: list = field(default_factory=list)
    counts: list = field(default_factory=list)

    @classmethod
    def initial(cls, k):
        return cls(k=k, means=[0.0] * k, counts=[0] * k)

    def index(self, arm):
        return self.means[arm] + math.sqrt(2.0 * math.log(self.t) / self.counts[arm])


def ucb_step(state, rng):
    if state.t <= state.k:
        # round-robin warmup
        arm = state.t - 1
    else:
        arm = min(range(state.k), key=lambda j: (-state.index(j), j))
    return ArmDistribution.point_mass(state.k, arm), arm


def ucb_update(state, arm, reward):
    previous = state.counts[arm]
    state.counts[arm] = previous + 1
    state.means[arm] = (state.means[arm] * previous + reward) / (previous + 1)
    state.t += 1
    return state


def uniform_step(k, rng):
    if k < 1:
        raise AlgorithmError(f"Need at least one arm, got k={k}")
    distribution = ArmDistribution.uniform(k)
    return distribution, distribution.sample(rng)


@dataclass
class ConjunctionBanditState:
    k: int
    d: int
    candidates: list = field(default_factory=list)

    @classmethod
    def initial(cls, k, d):
        return cls(k=k, d=d, candidates=[set(range(d)) for _ in range(k)])


def _check_contexts(state, contexts):
    if len(contexts) != state.k:
        raise InstanceError(f"Expected {state.k} contexts, got {len(contexts)}")
    for x in contexts:
        if not isinstance(x, BoolVector) or x.dimension != state.d:
            raise InstanceError(f"ConjunctionBandit expects BoolVector contexts of dimension {state.d}")


def conjunction_active_set(state, contexts):
    """Arms whose candidate variables are all 1 in their context."""
    _check_contexts(state, contexts)
    return frozenset(
        j for j, x in enumerate(contexts)
        if all(x.entries[m] == 1 for m in state.candidates[j])
    )


def conjunction_bandit_step(state, contexts, rng):
    """Return (distribution, chosen, explore); explore marks rounds that may prune."""
    active = conjunction_active_set(state, contexts)
    explore = not active
    distribution = ArmDistribution.uniform(state.k, None if explore else active)
    return distribution, distribution.sample(rng), explore


def conjunction_bandit_update(state, arm, context, reward, explore):
    if explore and reward == 1:
        state.candidates[arm] -= {m for m, v in enumerate(context.entries) if v == 0}
    return state


class Ucb:
    name = 'ucb'

    def __init__(self, k):
        self.state = UcbState.initial(k)

    def select(self, contexts, rng):
        return ucb_step(self.state, rng)

    def observe(self, arm, contexts, reward):
        ucb_update(self.state, arm, reward)

    def predictions(self):
        return None


class UniformPolicy:
    name = 'uniform'

    def __init__(self, k):
        self.k = k

    def select(self, contexts, rng):
        return uniform_step(self.k, rng)

    def observe(self, arm, contexts, reward):
        pass

    def predictions(self):
        return None


class ConjunctionBandit:
    name = 'conjunction_bandit'

    def __init__(self, k, d):
        self.state = ConjunctionBanditState.initial(k, d)
        self._explore = False

    def select(self, contexts, rng):
        distribution, chosen, self._explore = conjunction_bandit_step(self.state, contexts, rng)
        return distribution, chosen

    def observe(self, arm, contexts, reward):
        conjunction_bandit_update(self.state, arm, contexts[arm], reward, self._explore)

    def predictions(self):
        return None
