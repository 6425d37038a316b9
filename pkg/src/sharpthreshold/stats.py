"""Small statistics helpers shared by the Monte Carlo modules."""

from __future__ import annotations

import numpy as np


def wilson_interval(successes: float, trials: int, z: float = 3.0) -> tuple[float, float]:
    """Wilson score interval; well behaved for proportions near 0 and 1."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = (z / denom) * np.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials))
    return max(0.0, center - half), min(1.0, center + half)


def wilson_halfwidth(successes: float, trials: int, z: float = 3.0) -> float:
    lo, hi = wilson_interval(successes, trials, z)
    return (hi - lo) / 2.0


def proportion_stderr(phat: float, trials: int) -> float:
    """Plain binomial standard error of a sample proportion."""
    if trials <= 0:
        return 0.0
    return float(np.sqrt(max(phat * (1.0 - phat), 0.0) / trials))


_GAMMALN_MAX_N = 20_000


def binomial_weights(n_trials: int, p: float) -> np.ndarray:
    """P[Bin(n, p) = k] for k = 0..n, via accumulated log-factorials.

    The weights are renormalized to sum to 1; the pre-normalization sum must
    already be within 1e-10 of 1 or the computation is considered broken.
    Beyond ~2e4 trials the absolute error of float64 log-gamma alone exceeds
    that tolerance, so large cases accumulate the log-weights by a recurrence
    inside a 12-sigma window around the mode, anchored by one high-precision
    log-factorial evaluation; the truncated tail mass is far below 1e-12.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if p == 0.0:
        w = np.zeros(n_trials + 1)
        w[0] = 1.0
        return w
    if p == 1.0:
        w = np.zeros(n_trials + 1)
        w[n_trials] = 1.0
        return w
    if n_trials <= _GAMMALN_MAX_N:
        from scipy.special import gammaln

        k = np.arange(n_trials + 1)
        logw = (
            gammaln(n_trials + 1)
            - gammaln(k + 1)
            - gammaln(n_trials - k + 1)
            + k * np.log(p)
            + (n_trials - k) * np.log1p(-p)
        )
        w = np.exp(logw)
    else:
        w = _windowed_binomial_weights(n_trials, p)
    total = w.sum()
    if abs(total - 1.0) > 1e-10:
        raise ArithmeticError(f"binomial weights sum to {total}, expected 1 within 1e-10")
    return w / total


def _windowed_binomial_weights(n_trials: int, p: float) -> np.ndarray:
    import mpmath

    sigma = np.sqrt(n_trials * p * (1.0 - p))
    mode = min(n_trials, max(0, int((n_trials + 1) * p)))
    half = int(np.ceil(12.0 * sigma)) + 5
    lo, hi = max(0, mode - half), min(n_trials, mode + half)
    log_ratio = np.log(p) - np.log1p(-p)
    w = np.zeros(n_trials + 1)
    # log w_{k+1} - log w_k = log(n-k) - log(k+1) + log(p/(1-p))
    up = np.arange(mode, hi)
    logw_up = np.concatenate(
        [[0.0], np.cumsum(np.log(n_trials - up) - np.log(up + 1) + log_ratio)]
    )
    down = np.arange(mode, lo, -1)
    logw_down = np.cumsum(-(np.log(n_trials - down + 1) - np.log(down) + log_ratio))
    with mpmath.workdps(40):
        anchor = (
            mpmath.loggamma(n_trials + 1)
            - mpmath.loggamma(mode + 1)
            - mpmath.loggamma(n_trials - mode + 1)
            + mode * mpmath.log(mpmath.mpf(p))
            + (n_trials - mode) * mpmath.log1p(-mpmath.mpf(p))
        )
        log_anchor = float(anchor)
    w[mode : hi + 1] = np.exp(logw_up + log_anchor)
    w[lo:mode] = np.exp(logw_down[::-1] + log_anchor)
    return w


def binomial_upper_tails(n_trials: int, p: float) -> np.ndarray:
    """P[Bin(n, p) >= m] for m = 0..n, from the same log-factorial weights."""
    w = binomial_weights(n_trials, p)
    return np.cumsum(w[::-1])[::-1]
