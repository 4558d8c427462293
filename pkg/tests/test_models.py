import pytest

from fairbandits.exceptions import InstanceError, TraceError
from fairbandits.models import (
    UNIT, ArmDistribution, BanditInstance, BoolVector, ClassicArm, ContextualArm, RealVector,
    Rng, RoundTrace, append_round, sample_reward,
)


def classic(*means):
    return BanditInstance(arms=tuple(ClassicArm(mu) for mu in means))


def row(t, k=2, chosen=0):
    return RoundTrace(t, (UNIT,) * k, ArmDistribution.uniform(k), chosen, 1.0)


def test_degenerate_bernoulli_rewards(make_rng):
    rng = make_rng(3)
    instance = classic(1.0, 0.0)
    assert all(sample_reward(instance, 0, UNIT, rng) == 1.0 for _ in range(100))
    assert all(sample_reward(instance, 1, UNIT, rng) == 0.0 for _ in range(100))


def test_fair_coin_mean_with_a_million_draws():
    rng = Rng(42)
    instance = classic(0.5)
    total = sum(sample_reward(instance, 0, UNIT, rng) for _ in range(10 ** 6))
    assert abs(total / 10 ** 6 - 0.5) <= 0.002


def test_reward_mean_on_a_grid(make_rng):
    for step in range(11):
        mu = step / 10
        rng = make_rng(100 + step)
        instance = classic(mu)
        mean = sum(sample_reward(instance, 0, UNIT, rng) for _ in range(10 ** 5)) / 10 ** 5
        assert abs(mean - mu) <= 0.01


def test_sample_reward_rejects_bad_arm_and_context(make_rng):
    rng = make_rng()
    with pytest.raises(InstanceError):
        sample_reward(classic(0.5, 0.5), 2, UNIT, rng)
    linear = BanditInstance(arms=(ContextualArm('linear', (1.0, 0.0), 2),), family='linear')
    with pytest.raises(InstanceError):
        sample_reward(linear, 0, RealVector((1.0, 0.0, 0.0)), rng)
    with pytest.raises(InstanceError):
        sample_reward(linear, 0, UNIT, rng)


def test_noiseless_reward_is_the_payoff(make_rng):
    instance = BanditInstance(
        arms=(ContextualArm('linear', (0.6, 0.0), 2),), family='linear', reward_model='noiseless')
    assert sample_reward(instance, 0, RealVector((0.5, 0.0)), make_rng()) == pytest.approx(0.65)


def test_equal_seeds_draw_equal_sequences():
    a, b = Rng(11), Rng(11)
    assert [a.random() for _ in range(50)] == [b.random() for _ in range(50)]


def test_trial_substreams_differ():
    assert Rng.for_trial(7, 0).random() != Rng.for_trial(7, 1).random()
    assert Rng(7).child(3).random() == Rng(7, (3,)).random()


def test_append_round_accepts_consecutive_rows():
    trace = append_round([], row(1))
    assert len(trace) == 1
    for t in range(2, 6):
        append_round(trace, row(t))
    first = trace[0]
    append_round(trace, row(6))
    assert len(trace) == 6
    assert trace[0] is first


def test_append_round_rejects_gaps():
    trace = []
    for t in range(1, 6):
        append_round(trace, row(t))
    with pytest.raises(TraceError):
        append_round(trace, row(9))


def test_distribution_must_sum_to_one():
    with pytest.raises(TraceError):
        ArmDistribution((0.5, 0.4))
    with pytest.raises(TraceError):
        ArmDistribution((1.5, -0.5))
    assert ArmDistribution.uniform(4).probs == (0.25, 0.25, 0.25, 0.25)
    assert ArmDistribution.uniform(3, {0, 2}).probs == (0.5, 0.0, 0.5)


def test_point_mass_always_samples_its_arm(make_rng):
    rng = make_rng()
    distribution = ArmDistribution.point_mass(5, 3)
    assert {distribution.sample(rng) for _ in range(200)} == {3}


def test_sampling_follows_the_distribution(make_rng):
    rng = make_rng(5)
    distribution = ArmDistribution((0.2, 0.0, 0.8))
    draws = [distribution.sample(rng) for _ in range(20000)]
    assert 1 not in draws
    assert draws.count(2) / len(draws) == pytest.approx(0.8, abs=0.02)


def test_trace_row_needs_a_playable_arm():
    with pytest.raises(TraceError):
        RoundTrace(1, (UNIT, UNIT), ArmDistribution.point_mass(2, 0), 1, 1.0)


def test_contexts_are_validated():
    with pytest.raises(InstanceError):
        RealVector((1.0, 1.0))
    with pytest.raises(InstanceError):
        BoolVector((0, 2))
    assert BoolVector((1, 0, 1)).mask == 0b101


def test_linear_payoff_maps_inner_product_into_unit_interval():
    arm = ContextualArm('linear', (1.0, 0.0), 2)
    assert arm.value(RealVector((1.0, 0.0))) == 1.0
    assert arm.value(RealVector((-1.0, 0.0))) == 0.0
    assert arm.value(RealVector((0.0, 1.0))) == 0.5


def test_conjunction_and_dial_payoffs():
    conjunction = ContextualArm('conjunction', (0, 2), 3)
    assert conjunction.value(BoolVector((1, 0, 1))) == 1.0
    assert conjunction.value(BoolVector((1, 1, 0))) == 0.0
    dial = ContextualArm('dial', (), 1)
    assert dial.value(RealVector((0.3,))) == 0.3


def test_instance_rejects_out_of_range_means():
    with pytest.raises(InstanceError):
        ClassicArm(1.2)
    with pytest.raises(InstanceError):
        BanditInstance(arms=())


def test_instance_dump_lists_family_parameters():
    data = classic(0.2, 0.7).to_dict()
    assert data['k'] == 2
    assert data['means'] == [0.2, 0.7]
    assert BanditInstance.from_dict(data) == classic(0.2, 0.7)
