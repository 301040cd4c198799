"""f-divergences, Hellinger-lambda affinity, and TV-like parameterisations."""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .distributions import Distribution, align
from .errors import LambdaOutOfRange, ValidationError

# grid used to sanity-check TV-like parameters when a spec is built
TVLIKE_GRID = np.logspace(-12, 6, 10_000)
_CONVEXITY_GRID = np.concatenate([[0.0], np.logspace(-6, 6, 400)])


@dataclass(frozen=True)
class TvLikeParams:
    """Generator bounded by ``B`` on ``[0, b]`` and within ``[C1 x, C2 x]`` beyond ``b``."""

    b: float
    B: float
    C1: float
    C2: float

    def violations(self, f: Callable, f_prime_inf: float, tol: float = 1e-12) -> list[str]:
        out = []
        if not (self.b > 0 and self.B > 0 and 0 <= self.C1 <= self.C2):
            out.append("need b > 0, B > 0 and 0 <= C1 <= C2")
            return out
        x = TVLIKE_GRID
        fx = f(x)
        low = x <= self.b
        if np.any(fx[low] > self.B + tol):
            out.append(f"f exceeds B={self.B} on [0, b]")
        hi = ~low
        if np.any(fx[hi] < self.C1 * x[hi] - tol):
            worst = float(x[hi][np.argmin(fx[hi] - self.C1 * x[hi])])
            out.append(f"f < C1*x beyond b (first failure near x={worst:.6g})")
        if np.any(fx[hi] > self.C2 * x[hi] + tol):
            out.append("f > C2*x beyond b")
        if not (self.C1 - tol <= f_prime_inf <= self.C2 + tol):
            out.append("f'(inf) outside [C1, C2]")
        return out

    def holds_for(self, f: Callable, f_prime_inf: float) -> bool:
        return not self.violations(f, f_prime_inf)


@dataclass(frozen=True)
class DivergenceSpec:
    """An f-divergence: vectorised generator ``f`` on [0, inf) and ``f'(inf)``."""

    name: str
    f: Callable[[np.ndarray], np.ndarray]
    f_prime_inf: float
    tvlike: TvLikeParams | None = None

    def __post_init__(self) -> None:
        if abs(float(self.f(np.array([1.0]))[0])) > 1e-12:
            raise ValidationError(f"{self.name}: f(1) must be 0")
        a = _CONVEXITY_GRID[:-1]
        b = _CONVEXITY_GRID[1:]
        fa, fb, fm = self.f(a), self.f(b), self.f((a + b) / 2)
        slack = 1e-9 * (1 + np.abs(fa) + np.abs(fb))
        if np.any(fm > (fa + fb) / 2 + slack):
            raise ValidationError(f"{self.name}: f fails the midpoint-convexity check")
        if self.tvlike is not None:
            bad = self.tvlike.violations(self.f, self.f_prime_inf)
            if bad:
                raise ValidationError(f"{self.name}: TV-like parameters rejected: {bad}")

    def cell_value(self, p_mass: float, q_mass: float) -> float:
        """Contribution ``q f(p/q)`` of one output cell, ``f'(inf) p`` when ``q = 0``."""
        if q_mass > 0:
            return q_mass * float(self.f(np.array([p_mass / q_mass]))[0])
        if p_mass > 0:
            return self.f_prime_inf * p_mass
        return 0.0


def _check_lambda(lam: float) -> None:
    if not (0 < lam < 1):
        raise LambdaOutOfRange(f"lambda must lie in (0, 1), got {lam}")


def hellinger_generator(lam: float) -> Callable[[np.ndarray], np.ndarray]:
    """Nonnegative generator ``(1-lam) + lam*x - x**lam`` of H_lambda."""
    _check_lambda(lam)

    def f(x):
        x = np.asarray(x, dtype=float)
        return (1 - lam) + lam * x - np.power(x, lam)

    return f


def hellinger_tvlike_params(lam: float) -> TvLikeParams:
    """Closed-form TV-like constants for H_lambda.

    ``b = 1/lam, B = 1, C1 = lam (1 - sqrt(2/3)) / 4, C2 = 2 lam``.  The
    lower linear constant is only valid for ``lam`` up to about 0.587; callers
    that need a certified parameter set should go through
    :func:`hellinger_spec`, which drops parameters that fail the grid check.
    """
    _check_lambda(lam)
    return TvLikeParams(
        b=1 / lam,
        B=1.0,
        C1=lam * (1 - math.sqrt(2 / 3)) / 4,
        C2=2 * lam,
    )


def hellinger_spec(lam: float) -> DivergenceSpec:
    f = hellinger_generator(lam)
    params = hellinger_tvlike_params(lam)
    tvlike = params if params.holds_for(f, lam) else None
    return DivergenceSpec(f"hellinger_{lam:g}", f, lam, tvlike)


def tv_spec() -> DivergenceSpec:
    return DivergenceSpec(
        "tv",
        lambda x: np.abs(np.asarray(x, dtype=float) - 1) / 2,
        0.5,
        TvLikeParams(b=2.0, B=0.5, C1=0.25, C2=0.5),
    )


def kl_spec() -> DivergenceSpec:
    return DivergenceSpec("kl", lambda x: xlogy(x, x), math.inf)


def chi2_spec() -> DivergenceSpec:
    return DivergenceSpec("chi2", lambda x: (np.asarray(x, dtype=float) - 1) ** 2, math.inf)


def perspective(p: np.ndarray, q: np.ndarray, spec: DivergenceSpec) -> np.ndarray:
    """``q f(p/q)`` for ``q > 0``; ratios that overflow take the ``f'(inf) p`` limit."""
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        r = p / q
        big = ~np.isfinite(r)
        out = q * spec.f(np.where(big, 1.0, r))
        if big.any():
            out = np.where(big, spec.f_prime_inf * p, out)
    return out


def f_divergence_arrays(p: np.ndarray, q: np.ndarray, spec: DivergenceSpec) -> float:
    pos_q = q > 0
    finite = 0.0
    if pos_q.any():
        finite = math.fsum(perspective(p[pos_q], q[pos_q], spec))
    tail = math.fsum(p[(~pos_q) & (p > 0)])
    if tail == 0:
        return finite
    if math.isinf(spec.f_prime_inf):
        return math.inf
    return finite + spec.f_prime_inf * tail


def f_divergence(P: Distribution, Q: Distribution, spec: DivergenceSpec) -> float:
    _, p, q = align(P, Q)
    return f_divergence_arrays(p, q, spec)


def affinity(p: np.ndarray, q: np.ndarray, lam: float) -> float:
    """``sum p^lam q^(1-lam)`` over atoms charged by both, clipped to [0, 1]."""
    both = (p > 0) & (q > 0)
    if not both.any():
        return 0.0
    terms = np.exp(lam * np.log(p[both]) + (1 - lam) * np.log(q[both]))
    return min(1.0, math.fsum(terms))


def hellinger_affinity(P: Distribution, Q: Distribution, lam: float) -> float:
    _check_lambda(lam)
    _, p, q = align(P, Q)
    return affinity(p, q, lam)


def hellinger_arrays(p: np.ndarray, q: np.ndarray, lam: float) -> float:
    """H_lambda as ``sum q f_lam(p/q) + lam * P{q = 0}``.

    Written as ``lam (p - q) - q expm1(lam log(p/q))`` per atom so that small
    divergences do not drown in the ``1 - beta`` cancellation.
    """
    pos_q = q > 0
    pp, qq = p[pos_q], q[pos_q]
    with np.errstate(divide="ignore"):
        logp = np.log(pp)
    logq = np.log(qq)
    x = lam * (logp - logq)
    small = np.abs(x) < 1
    # q (r^lam - 1): expm1 near r = 1, the product form elsewhere so that nothing overflows
    excess = np.where(
        small,
        qq * np.expm1(np.where(small, x, 0.0)),
        np.exp(lam * logp + (1 - lam) * logq) - qq,
    )
    terms = lam * (pp - qq) - excess
    tail = lam * math.fsum(p[~pos_q])
    return max(0.0, math.fsum(terms) + tail)


def hellinger(P: Distribution, Q: Distribution, lam: float) -> float:
    _check_lambda(lam)
    _, p, q = align(P, Q)
    return hellinger_arrays(p, q, lam)


def total_variation(P: Distribution, Q: Distribution) -> float:
    _, p, q = align(P, Q)
    return 0.5 * math.fsum(np.abs(p - q))


def tensorized_affinity(beta: float, n: int) -> float:
    if not (0 <= beta <= 1):
        raise ValueError(f"beta must lie in [0, 1], got {beta}")
    if beta == 0:
        return 0.0
    return math.exp(n * math.log(beta))
