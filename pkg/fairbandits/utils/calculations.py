import math

import numpy as np


def pull_count_floor(t, k, delta):
    """Lower bound on the pulls of any still-active arm at round t"""
    return t / k - math.sqrt((t / 2.0) * math.log(2.0 * k * t * t / delta))


def width_bound(t, k, delta):
    """Width bound eta(t) on every active interval, given the pull-count floor"""
    floor = pull_count_floor(t, k, delta)
    if floor <= 0:
        return math.inf
    return 2.0 * math.sqrt(math.log((math.pi * t) ** 2 / (3.0 * delta)) / (2.0 * floor))


def fair_bandits_regret_bound(horizon, k, delta):
    """Cumulative regret bound: sum of min(1, k*eta(t)) plus the failure term"""
    total = math.fsum(min(1.0, k * width_bound(t, k, delta)) for t in range(1, horizon + 1))
    return total + (1.0 + math.pi / 2.0) * delta * horizon


def binomial_slack(delta, trials):
    """Three standard deviations of a Binomial(trials, delta) fraction"""
    return 3.0 * math.sqrt(delta * (1.0 - delta) / trials)


def within_delta_budget(violated_runs, trials, delta):
    """Check a violated-run count against delta plus binomial slack"""
    if trials <= 0:
        return True
    return violated_runs / trials <= delta + binomial_slack(delta, trials)


def standard_error(values, axis=0):
    values = np.asarray(values, dtype=float)
    n = values.shape[axis]
    if n < 2:
        return np.zeros(np.delete(values.shape, axis))
    return values.std(axis=axis, ddof=1) / math.sqrt(n)


def regret_rate(series, window=None):
    """Per-round regret over the trailing window of a cumulative series"""
    series = np.asarray(series, dtype=float)
    horizon = len(series)
    if horizon == 0:
        return 0.0
    if window is None:
        window = max(1, horizon // 10)
    window = min(window, horizon)
    start = series[horizon - window - 1] if horizon > window else 0.0
    return float((series[-1] - start) / window)


def fit_power_law(xs, ys):
    """Fit ys ~ c * xs**alpha on a log-log scale and return (alpha, c)"""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) < 2 or np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("Power-law fit needs at least two positive points")
    alpha, intercept = np.polyfit(np.log(xs), np.log(ys), 1)
    return float(alpha), float(math.exp(intercept))
