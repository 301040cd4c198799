"""Exact Bayes error, the optimal exponent lambda*, and the one-shot lower bound."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .distributions import (
    Distribution,
    align,
    ratio_profile,
    type_class_table,
    validate,
)
from .divergences import affinity
from .errors import (
    DegenerateError,
    DeltaOutOfRange,
    GateError,
    PreconditionViolated,
    ValidationError,
)

PAD_LABEL = "‹pad›"


@dataclass(frozen=True)
class Prior:
    """Probability ``pi`` of the hypothesis ``P``; the other hypothesis gets ``1 - pi``."""

    pi: float

    def __post_init__(self) -> None:
        if not (0 < self.pi <= 0.5):
            raise GateError(f"prior must lie in (0, 0.5], got {self.pi}")

    @property
    def bar(self) -> float:
        return 1.0 - self.pi


def _prior(prior: Prior | float) -> Prior:
    return prior if isinstance(prior, Prior) else Prior(float(prior))


@dataclass(frozen=True)
class LambdaStar:
    value: float
    pi: float
    delta: float


def _bayes_arrays(p: np.ndarray, q: np.ndarray, pi: float) -> float:
    return math.fsum(np.minimum(pi * p, (1 - pi) * q))


def bayes_error(P: Distribution, Q: Distribution, prior: Prior | float) -> float:
    prior = _prior(prior)
    _, p, q = align(P, Q)
    return _bayes_arrays(p, q, prior.pi)


def log_bayes_error_product_arrays(
    p: np.ndarray, q: np.ndarray, pi: float, n: int, cap: int | None = None
) -> float:
    """``log e_pi(P^n, Q^n)`` by summing over type classes in log space."""
    _, log_mult, lp, lq = type_class_table(p, q, n, cap)
    per_seq = np.minimum(math.log(pi) + lp, math.log1p(-pi) + lq)
    return float(logsumexp(log_mult + per_seq))


def _merged(P: Distribution, Q: Distribution) -> tuple[np.ndarray, np.ndarray]:
    # equal-ratio atoms form a sufficient statistic; merging shrinks the enumeration
    prof = ratio_profile(P, Q)
    return prof.p, prof.q


def bayes_error_product(
    P: Distribution, Q: Distribution, prior: Prior | float, n: int, cap: int | None = None
) -> float:
    """Exact ``e_pi(P^{(x)n}, Q^{(x)n})``."""
    prior = _prior(prior)
    p, q = _merged(P, Q)
    return math.exp(log_bayes_error_product_arrays(p, q, prior.pi, n, cap))


def lambda_star(prior: Prior | float, delta: float) -> LambdaStar:
    prior = _prior(prior)
    pi = prior.pi
    if not (0 < delta < pi):
        raise DeltaOutOfRange(f"delta must lie in (0, pi={pi}), got {delta}")
    # logs of ratios, not of exponentials: delta may be 1e-30
    a = math.log(prior.bar) - math.log(delta)
    b = math.log(pi) - math.log(delta)
    return LambdaStar(a / (a + b), pi, delta)


def bayes_upper_bound(prior: Prior | float, lam: float, beta: float) -> float:
    prior = _prior(prior)
    if not (0 <= lam <= 1):
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    if not (0 <= beta <= 1):
        raise ValueError(f"beta must lie in [0, 1], got {beta}")
    return prior.pi**lam * prior.bar ** (1 - lam) * beta


def one_shot_bound_value(pi: float, lam: float, beta: float) -> float:
    """``(1/4) pi^lam (1-pi)^(1-lam) beta^2``."""
    return 0.25 * pi**lam * (1 - pi) ** (1 - lam) * beta**2


def one_shot_lower_bound(
    P: Distribution, Q: Distribution, prior: Prior | float, delta: float
) -> float:
    """Lower bound on any error level ``delta >= e_pi(P, Q)``; never exceeds ``delta``."""
    prior = _prior(prior)
    _, p, q = align(P, Q)
    e = _bayes_arrays(p, q, prior.pi)
    if e <= 0 or e >= prior.pi:
        raise DegenerateError(f"Bayes error {e} is not inside (0, pi)")
    if delta < e:
        raise PreconditionViolated(f"delta={delta} is below the Bayes error {e}")
    ls = lambda_star(prior, delta)
    return one_shot_bound_value(prior.pi, ls.value, affinity(p, q, ls.value))


def bernoulli_reduction(
    P: Distribution, Q: Distribution, prior: Prior | float
) -> tuple[float, float]:
    """Masses ``(P(A), Q(A))`` of the set ``A = {pi P <= (1-pi) Q}``."""
    prior = _prior(prior)
    _, p, q = align(P, Q)
    in_a = prior.pi * p <= prior.bar * q
    return math.fsum(p[in_a]), math.fsum(q[in_a])


def pad_to_error(
    P: Distribution, Q: Distribution, prior: Prior | float, delta: float
) -> tuple[Distribution, Distribution, float]:
    """Mix both hypotheses with a shared fresh atom so the Bayes error becomes ``delta``.

    The error of the mixture is ``gamma e + (1 - gamma) pi``, hence
    ``gamma = (pi - delta) / (pi - e)``.
    """
    prior = _prior(prior)
    labels, p, q = align(P, Q)
    if PAD_LABEL in labels:
        raise ValidationError(f"label {PAD_LABEL!r} is reserved for padding")
    e = _bayes_arrays(p, q, prior.pi)
    if not (e <= delta < prior.pi):
        raise DeltaOutOfRange(f"need e_pi={e} <= delta < pi={prior.pi}, got {delta}")
    gamma = (prior.pi - delta) / (prior.pi - e)
    gamma = min(gamma, 1.0)
    new_labels = (*labels, PAD_LABEL)
    pt = np.append(gamma * p, 1 - gamma)
    qt = np.append(gamma * q, 1 - gamma)
    return validate(pt.tolist(), new_labels), validate(qt.tolist(), new_labels), gamma


def _line1_affinity(pi: float, delta: float, lam: float):
    """Affinity of Ber(p), Ber(q) along ``q = (pi/(1-pi)) p + 1 - delta/(1-pi)``."""
    bar = 1 - pi

    def beta(x: float) -> float:
        qx = pi / bar * x + 1 - delta / bar
        qx = min(max(qx, 0.0), 1.0)
        return affinity(np.array([x, 1 - x]), np.array([qx, 1 - qx]), lam)

    return beta


def _golden_max(fun, lo: float, hi: float, tol: float = 1e-12) -> tuple[float, float]:
    g = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = fun(d)
    x = (a + b) / 2
    return x, fun(x)


def affinity_levelset_sup(prior: Prior | float, delta: float, lam: float) -> float:
    """Largest ``beta_lam(Ber(p), Ber(q))`` over Bernoulli pairs with Bayes error ``delta``.

    The level set is two segments swapped by ``(p, q) -> (1-p, 1-q)``, which
    leaves the affinity unchanged, so only the first segment
    ``p in [0, delta/pi]`` is searched.  The affinity is concave along it.
    """
    prior = _prior(prior)
    if not (0 < delta < prior.pi):
        raise DeltaOutOfRange(f"delta must lie in (0, pi={prior.pi}), got {delta}")
    beta = _line1_affinity(prior.pi, delta, lam)
    hi = delta / prior.pi
    _, inner = _golden_max(beta, 0.0, hi)
    return max(inner, beta(0.0), beta(hi))


def levelset_sup_bound(prior: Prior | float, delta: float) -> float:
    """Closed-form ceiling ``(delta/pi)^lam* (2 - delta/(1-pi))`` at ``lam = lam*``."""
    prior = _prior(prior)
    ls = lambda_star(prior, delta)
    return (delta / prior.pi) ** ls.value * (2 - delta / prior.bar)
