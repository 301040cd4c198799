"""Two-sided sample-complexity formula and an exact search oracle."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .bayes import LambdaStar, Prior, _prior, lambda_star, log_bayes_error_product_arrays
from .distributions import Distribution, align, ratio_profile
from .divergences import hellinger_arrays
from .errors import DeltaOutOfRange, IdenticalDistributions, RegimeViolation

DEFAULT_N_MAX = 200


@dataclass(frozen=True)
class ScBounds:
    lower: int
    upper: int
    lambda_star: LambdaStar
    beta_star_affinity: float


@dataclass(frozen=True)
class NotFoundBelow:
    """No sample size up to ``n_max`` reaches the target error."""

    n_max: int


def check_delta(prior: Prior, delta: float, permissive: bool = False) -> None:
    """Gate ``delta`` to ``(0, pi/16]``; with ``permissive`` only warn above pi/16."""
    if not (0 < delta < prior.pi):
        raise DeltaOutOfRange(f"delta must lie in (0, pi), got {delta}")
    if delta > prior.pi / 16:
        msg = f"delta={delta} exceeds pi/16={prior.pi / 16}; the bounds carry no guarantee"
        if not permissive:
            raise DeltaOutOfRange(msg)
        warnings.warn(msg, stacklevel=3)


def log_inv_affinity(p: np.ndarray, q: np.ndarray, lam: float) -> float:
    """``log(1/beta_lam)`` computed from H_lam so it stays accurate as beta -> 1."""
    h = hellinger_arrays(p, q, lam)
    if h >= 1:
        return math.inf
    return -math.log1p(-h)


def bounds_from_log_affinity(lam: float, log_ratio: float, log_inv_beta: float) -> tuple[int, int]:
    if log_inv_beta <= 0:
        raise IdenticalDistributions("affinity is 1: the hypotheses cannot be told apart")
    x = log_ratio / log_inv_beta
    return max(1, math.ceil(lam / 2 * x)), max(1, math.ceil(2 * lam * x))


def sc_bounds(
    P: Distribution,
    Q: Distribution,
    prior: Prior | float,
    delta: float,
    permissive: bool = False,
) -> ScBounds:
    """Lower and upper bounds on the sample complexity, a factor 4 apart."""
    prior = _prior(prior)
    check_delta(prior, delta, permissive)
    _, p, q = align(P, Q)
    ls = lambda_star(prior, delta)
    lib = log_inv_affinity(p, q, ls.value)
    lower, upper = bounds_from_log_affinity(ls.value, math.log(prior.pi / delta), lib)
    return ScBounds(lower, upper, ls, math.exp(-lib))


def _smallest_n(err, delta: float, n_max: int) -> int | NotFoundBelow:
    """Smallest ``n <= n_max`` with ``err(n) <= delta`` for a non-increasing ``err``."""
    lo, hi = 0, 1
    while err(hi) > delta:
        if hi >= n_max:
            return NotFoundBelow(n_max)
        lo, hi = hi, min(2 * hi, n_max)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if err(mid) <= delta:
            hi = mid
        else:
            lo = mid
    return hi


def sc_exact_arrays(
    p: np.ndarray,
    q: np.ndarray,
    pi: float,
    delta: float,
    n_max: int = DEFAULT_N_MAX,
    cap: int | None = None,
) -> int | NotFoundBelow:
    if np.allclose(p, q, rtol=0, atol=0):
        return NotFoundBelow(n_max)
    log_delta = math.log(delta)
    cache: dict[int, float] = {}

    def err(n: int) -> float:
        if n not in cache:
            cache[n] = log_bayes_error_product_arrays(p, q, pi, n, cap)
        return cache[n]

    return _smallest_n(err, log_delta, n_max)


def sc_exact(
    P: Distribution,
    Q: Distribution,
    prior: Prior | float,
    delta: float,
    n_max: int = DEFAULT_N_MAX,
    cap: int | None = None,
) -> int | NotFoundBelow:
    """Smallest ``n`` whose exact Bayes error on ``n`` i.i.d. samples is at most ``delta``."""
    prior = _prior(prior)
    prof = ratio_profile(P, Q)
    return sc_exact_arrays(prof.p, prof.q, prior.pi, delta, n_max, cap)


def sc_simplified(
    P: Distribution, Q: Distribution, prior: Prior | float, delta: float
) -> float:
    """``log(pi/delta) / H_{lam*}``, valid up to constants when ``H_{1/2} <= 0.25``."""
    prior = _prior(prior)
    check_delta(prior, delta)
    _, p, q = align(P, Q)
    h_half = hellinger_arrays(p, q, 0.5)
    if h_half > 0.25:
        raise RegimeViolation(f"H_1/2 = {h_half} exceeds 0.25")
    ls = lambda_star(prior, delta)
    h = hellinger_arrays(p, q, ls.value)
    if h <= 0:
        raise IdenticalDistributions("H_lambda* is 0")
    return math.log(prior.pi / delta) / h
