"""
Fair stochastic bandits by chained confidence intervals.

Each round the arm with the highest upper confidence bound is found, every
active arm whose interval is connected to it through a chain of overlapping
intervals stays active, and one of them is played uniformly at random. Arms
that fall out of the chain never return.
"""
import logging
import math
from dataclasses import dataclass, field

from fairbandits.exceptions import AlgorithmError
from fairbandits.models import ArmDistribution
from fairbandits.utils.union_find import UnionFind

logger = logging.getLogger(__name__)


@dataclass
class ConfidenceInterval:
    lower: float = 0.0
    upper: float = 1.0

    def __post_init__(self):
        if self.lower > self.upper:
            raise AlgorithmError(f"Interval lower bound {self.lower} exceeds upper bound {self.upper}")

    @property
    def width(self):
        return self.upper - self.lower

    def contains(self, value):
        return self.lower <= value <= self.upper

    def overlaps(self, other, closed=True):
        if closed:
            return self.lower <= other.upper and other.lower <= self.upper
        return self.lower < other.upper and other.lower < self.upper


@dataclass
class FairBanditsState:
    k: int
    delta: float
    t: int = 1
    means: list = field(default_factory=list)
    counts: list = field(default_factory=list)
    intervals: list = field(default_factory=list)
    active: frozenset = frozenset()

    @classmethod
    def initial(cls, k, delta):
        if k < 1:
            raise AlgorithmError(f"Need at least one arm, got k={k}")
        if not 0 < delta < 1:
            raise AlgorithmError(f"delta must be in (0, 1), got {delta}")
        return cls(
            k=k,
            delta=delta,
            means=[0.5] * k,
            counts=[0] * k,
            intervals=[ConfidenceInterval() for _ in range(k)],
            active=frozenset(range(k)),
        )


def confidence_radius(tau, n, delta):
    """Hoeffding radius for n samples at round tau."""
    if n < 1:
        raise AlgorithmError("Confidence radius needs at least one sample")
    if tau < 1:
        raise AlgorithmError(f"Round index must be >= 1, got {tau}")
    if not 0 < delta < 1:
        raise AlgorithmError(f"delta must be in (0, 1), got {delta}")
    return math.sqrt(math.log((math.pi * tau) ** 2 / (3.0 * delta)) / (2.0 * n))


def top_arm(intervals):
    """Arm with the highest upper bound; lowest index wins ties."""
    if not intervals:
        raise AlgorithmError("Cannot pick a top arm from an empty candidate set")
    return min(intervals, key=lambda arm: (-intervals[arm].upper, arm))


def chained_set(intervals, top, closed=True):
    """
    Connected component of top in the interval-overlap graph.

    intervals maps arm -> ConfidenceInterval for the candidate set. With
    closed=False, intervals are treated as open and touching endpoints do not
    link.
    """
    if not intervals:
        raise AlgorithmError("Cannot chain an empty candidate set")
    if top not in intervals:
        raise AlgorithmError(f"Top arm {top} is not a candidate")

    # Sweep by lower endpoint: an interval joins the running group iff it
    # starts before the furthest upper endpoint seen in that group.
    order = sorted(intervals, key=lambda arm: (intervals[arm].lower, arm))
    groups = UnionFind(order)
    anchor = order[0]
    reach = intervals[anchor].upper
    for arm in order[1:]:
        lower = intervals[arm].lower
        linked = lower <= reach if closed else lower < reach
        if linked:
            groups.union(anchor, arm)
            reach = max(reach, intervals[arm].upper)
        else:
            anchor = arm
            reach = intervals[arm].upper
    return groups.component(top)


def preview_active(state):
    """Active set the next step would play, without mutating state."""
    if not state.active:
        raise AlgorithmError("Active set is empty")
    candidates = {arm: state.intervals[arm] for arm in state.active}
    return chained_set(candidates, top_arm(candidates))


def fair_bandits_step(state, rng):
    state.active = preview_active(state)
    distribution = ArmDistribution.uniform(state.k, state.active)
    return distribution, distribution.sample(rng)


def fair_bandits_update(state, arm, reward):
    if arm not in state.active:
        raise AlgorithmError(f"Arm {arm} is not active in round {state.t}")
    if not 0.0 <= reward <= 1.0:
        raise AlgorithmError(f"Reward must be in [0, 1], got {reward}")
    previous = state.counts[arm]
    state.counts[arm] = previous + 1
    state.means[arm] = (state.means[arm] * previous + reward) / (previous + 1)
    radius = confidence_radius(state.t + 1, state.counts[arm], state.delta)
    state.intervals[arm] = ConfidenceInterval(state.means[arm] - radius, state.means[arm] + radius)
    state.t += 1
    return state


class FairBandits:
    """Policy wrapper driven by the experiment harness."""
    name = 'fair_bandits'

    def __init__(self, k, delta):
        self.state = FairBanditsState.initial(k, delta)

    def select(self, contexts, rng):
        before = self.state.active
        distribution, chosen = fair_bandits_step(self.state, rng)
        if self.state.active != before:
            logger.debug(f"Round {self.state.t}: eliminated arms {sorted(before - self.state.active)}")
        return distribution, chosen

    def observe(self, arm, contexts, reward):
        fair_bandits_update(self.state, arm, reward)

    def predictions(self):
        return None

    def interval_rows(self):
        """Rows (t, arm, lower, upper, active) for the current round."""
        state = self.state
        return [
            (state.t, arm, interval.lower, interval.upper, int(arm in state.active))
            for arm, interval in enumerate(state.intervals)
        ]


class FairBanditsReplay:
    """
    Pure distribution queries over a history, ignoring contexts.

    The state reached by replaying a history is cached by its length so that
    repeated queries over a growing history cost one update per new row.
    """

    def __init__(self, k, delta):
        self.k = k
        self.delta = delta
        self._reset()

    def _reset(self):
        self._state = FairBanditsState.initial(self.k, self.delta)
        self._synced = 0
        self._last_row = None

    def _replayed(self, history):
        if self._synced > len(history) or (
                self._synced and history[self._synced - 1] is not self._last_row):
            self._reset()
        for row in history[self._synced:]:
            self._state.active = preview_active(self._state)
            fair_bandits_update(self._state, row.chosen, row.reward)
            self._last_row = row
        self._synced = len(history)
        return self._state

    def distribution(self, history, contexts):
        state = self._replayed(history)
        return ArmDistribution.uniform(self.k, preview_active(state))
