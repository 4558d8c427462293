import math


def validate_delta(delta):
    if not isinstance(delta, (int, float)) or not 0 < delta < 1:
        return False, f"delta must be in (0, 1), got {delta!r}"
    return True, "delta is valid"


def validate_epsilon(epsilon):
    if not isinstance(epsilon, (int, float)) or not 0 <= epsilon <= 1:
        return False, f"epsilon must be in [0, 1], got {epsilon!r}"
    return True, "epsilon is valid"


def validate_horizon(horizon):
    if not isinstance(horizon, int) or isinstance(horizon, bool) or horizon < 1:
        return False, f"horizon must be an integer >= 1, got {horizon!r}"
    return True, "horizon is valid"


def validate_arm_count(k, minimum=1):
    if not isinstance(k, int) or isinstance(k, bool) or k < minimum:
        return False, f"k must be an integer >= {minimum}, got {k!r}"
    return True, "k is valid"


def validate_dimension(d, maximum=None):
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        return False, f"d must be an integer >= 1, got {d!r}"
    if maximum is not None and d > maximum:
        return False, f"d must be at most {maximum}, got {d}"
    return True, "d is valid"


def validate_means(means):
    if not means:
        return False, "means cannot be empty"
    for mean in means:
        if not isinstance(mean, (int, float)) or not math.isfinite(mean) or not 0 <= mean <= 1:
            return False, f"every mean must be in [0, 1], got {mean!r}"
    return True, "means are valid"


def validate_trials(trials):
    if not isinstance(trials, int) or isinstance(trials, bool) or trials < 1:
        return False, f"trials must be an integer >= 1, got {trials!r}"
    return True, "trials is valid"


def validate_seed(seed):
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2 ** 64:
        return False, f"seed must be an unsigned 64-bit integer, got {seed!r}"
    return True, "seed is valid"


def validate_axis_values(values):
    if not values:
        return False, "sweep values cannot be empty"
    if any(b <= a for a, b in zip(values, values[1:])):
        return False, f"sweep values must be strictly increasing, got {list(values)}"
    return True, "sweep values are valid"


def validate_choice(name, value, choices):
    if value not in choices:
        return False, f"unknown {name} '{value}' (expected one of: {', '.join(sorted(choices))})"
    return True, f"{name} is valid"
