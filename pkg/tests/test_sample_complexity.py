import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypotest.bayes import bayes_error, bayes_error_product, lambda_star
from hypotest.distributions import bernoulli, validate
from hypotest.divergences import hellinger, hellinger_affinity
from hypotest.errors import DeltaOutOfRange, IdenticalDistributions, RegimeViolation
from hypotest.sample_complexity import (
    NotFoundBelow,
    bounds_from_log_affinity,
    sc_bounds,
    sc_exact,
    sc_simplified,
)

P75, P25 = bernoulli(0.75), bernoulli(0.25)


def test_worked_bounds():
    b = sc_bounds(P75, P25, 0.5, 1 / 32)
    assert b.lambda_star.value == 0.5
    assert b.beta_star_affinity == pytest.approx(math.sqrt(3) / 2, abs=1e-15)
    assert (b.lower, b.upper) == (5, 20)
    assert 0.25 * math.log(16) / math.log(2 / math.sqrt(3)) == pytest.approx(4.8188, abs=1e-4)


def test_worked_exact():
    n = sc_exact(P75, P25, 0.5, 1 / 32)
    assert n == 13
    assert bayes_error_product(P75, P25, 0.5, 13) <= 1 / 32 < bayes_error_product(P75, P25, 0.5, 12)


def test_swap_symmetry():
    a = sc_bounds(P75, P25, 0.5, 1 / 32)
    b = sc_bounds(P25, P75, 0.5, 1 / 32)
    assert (a.lower, a.upper) == (b.lower, b.upper)


def test_near_identical_no_overflow():
    lam = 0.5
    lower, upper = bounds_from_log_affinity(lam, math.log(16), 1e-15)
    assert lower > 1e14 and upper == pytest.approx(4 * lower, rel=1e-6)
    P = validate([0.5 + 1e-7, 0.5 - 1e-7])
    Q = validate([0.5, 0.5])
    b = sc_bounds(P, Q, 0.5, 0.01)
    assert b.lower > 1e12


def test_delta_gate():
    with pytest.raises(DeltaOutOfRange):
        sc_bounds(P75, P25, 0.5, 0.2)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        b = sc_bounds(P75, P25, 0.5, 0.2, permissive=True)
    assert caught and b.lower >= 1
    with pytest.raises(DeltaOutOfRange):
        sc_bounds(P75, P25, 0.5, 0.5, permissive=True)


def test_identical_distributions():
    with pytest.raises(IdenticalDistributions):
        sc_bounds(P75, P75, 0.5, 0.01)
    assert sc_exact(P75, P75, 0.5, 0.01) == NotFoundBelow(200)


def test_exact_single_sample():
    e = bayes_error(P75, P25, 0.3)
    assert sc_exact(P75, P25, 0.3, e + 1e-12) == 1


def test_exact_relabel_and_zero_atoms():
    P = validate([0.6, 0.3, 0.1])
    Q = validate([0.2, 0.3, 0.5])
    n = sc_exact(P, Q, 0.4, 0.01)
    P2 = validate([0.1, 0.0, 0.6, 0.3], ["c", "z", "a", "b"])
    Q2 = validate([0.5, 0.0, 0.2, 0.3], ["c", "z", "a", "b"])
    assert sc_exact(P2, Q2, 0.4, 0.01) == n


def test_not_found_below():
    P = validate([0.5 + 1e-3, 0.5 - 1e-3])
    Q = validate([0.5, 0.5])
    assert sc_exact(P, Q, 0.5, 0.01, n_max=50) == NotFoundBelow(50)


def test_sandwich_random(rng):
    checked = 0
    while checked < 80:
        k = int(rng.integers(2, 5))
        P = validate(rng.dirichlet(np.ones(k)).tolist())
        Q = validate(rng.dirichlet(np.ones(k)).tolist())
        pi = float(rng.uniform(0.05, 0.5))
        delta = pi / float(rng.uniform(16, 500))
        b = sc_bounds(P, Q, pi, delta)
        n = sc_exact(P, Q, pi, delta)
        if isinstance(n, NotFoundBelow):
            assert b.upper > 200
            continue
        checked += 1
        assert b.lower <= n <= b.upper


def test_simplified_regime_gate():
    P, Q = bernoulli(0.86), bernoulli(0.14)
    assert hellinger(P, Q, 0.5) == pytest.approx(0.306, abs=1e-3)
    with pytest.raises(RegimeViolation):
        sc_simplified(P, Q, 0.5, 0.01)


def test_simplified_close_to_exact(rng):
    done = 0
    while done < 40:
        k = int(rng.integers(2, 4))
        P = validate(rng.dirichlet(np.ones(k)).tolist())
        Q = validate(rng.dirichlet(np.ones(k)).tolist())
        if hellinger(P, Q, 0.5) > 0.25:
            continue
        pi = float(rng.uniform(0.05, 0.5))
        delta = pi / float(rng.uniform(16, 200))
        n = sc_exact(P, Q, pi, delta)
        if isinstance(n, NotFoundBelow):
            continue
        done += 1
        s = sc_simplified(P, Q, pi, delta)
        assert n / 8 <= s <= 8 * n
        lam = lambda_star(pi, delta).value
        beta = hellinger_affinity(P, Q, lam)
        assert lam / 2 * math.log(pi / delta) / math.log(1 / beta) >= 1


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-6, 0.5))
def test_log_inverse_affinity_vs_hellinger(h):
    # x <= log(1/(1-x)) <= 2 log(2) x on [0, 1/2]
    r = -math.log1p(-h) / h
    assert 1 - 1e-12 <= r <= 2 * math.log(2) + 1e-12
