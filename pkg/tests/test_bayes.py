import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypotest.bayes import (
    PAD_LABEL,
    Prior,
    affinity_levelset_sup,
    bayes_error,
    bayes_error_product,
    bayes_upper_bound,
    bernoulli_reduction,
    lambda_star,
    levelset_sup_bound,
    one_shot_bound_value,
    one_shot_lower_bound,
    pad_to_error,
    _line1_affinity,
)
from hypotest.distributions import align, bernoulli, validate
from hypotest.divergences import affinity, hellinger_affinity
from hypotest.errors import (
    DegenerateError,
    DeltaOutOfRange,
    EnumerationTooLarge,
    GateError,
    PreconditionViolated,
)

from conftest import distribution_pairs


def brute_product_error(P, Q, pi, n):
    _, p, q = align(P, Q)
    total = []
    for seq in itertools.product(range(len(p)), repeat=n):
        idx = list(seq)
        total.append(min(pi * np.prod(p[idx]), (1 - pi) * np.prod(q[idx])))
    return math.fsum(total)


def test_prior_range():
    assert Prior(0.5).bar == 0.5
    for bad in (0.0, 0.6, -0.1):
        with pytest.raises(GateError):
            Prior(bad)


def test_bayes_error_examples():
    P = validate([0.2, 0.8])
    assert bayes_error(P, P, 0.3) == pytest.approx(0.3, abs=1e-15)
    assert bayes_error(bernoulli(1.0), bernoulli(0.0), 0.5) == 0.0
    assert bayes_error(bernoulli(0.9), bernoulli(0.1), 0.5) == pytest.approx(0.1, abs=1e-15)


def test_product_error_examples():
    P, Q = bernoulli(0.75), bernoulli(0.25)
    assert bayes_error_product(P, Q, 0.5, 3) == pytest.approx(0.15625, abs=1e-14)
    assert bayes_error_product(P, Q, 0.5, 1) == pytest.approx(bayes_error(P, Q, 0.5), abs=1e-15)
    R = validate([0.1, 0.2, 0.7])
    assert bayes_error_product(R, R, 0.2, 9) == pytest.approx(0.2, abs=1e-12)


def test_product_error_brute_force(rng):
    for _ in range(60):
        k = int(rng.integers(1, 4))
        P = validate(rng.dirichlet(np.ones(k)).tolist())
        Q = validate(rng.dirichlet(np.ones(k)).tolist())
        pi = float(rng.uniform(0.01, 0.5))
        n = int(rng.integers(1, 9))
        assert bayes_error_product(P, Q, pi, n) == pytest.approx(
            brute_product_error(P, Q, pi, n), abs=1e-10
        )


def test_product_error_monotone_in_n(rng):
    for _ in range(40):
        k = int(rng.integers(2, 5))
        P = validate(rng.dirichlet(np.ones(k)).tolist())
        Q = validate(rng.dirichlet(np.ones(k)).tolist())
        pi = float(rng.uniform(0.05, 0.5))
        errs = [bayes_error_product(P, Q, pi, n) for n in range(1, 13)]
        assert all(b <= a + 1e-14 for a, b in zip(errs, errs[1:]))


def test_product_error_large_n_no_underflow():
    e = bayes_error_product(bernoulli(0.75), bernoulli(0.25), 0.5, 400)
    assert 0 < e < 1e-20


def test_product_error_cap():
    P = validate([0.25] * 4)
    Q = validate([0.1, 0.2, 0.3, 0.4])
    with pytest.raises(EnumerationTooLarge):
        bayes_error_product(P, Q, 0.5, 100, cap=1000)


def test_lambda_star_examples():
    assert lambda_star(0.5, 0.01).value == 0.5
    ls = lambda_star(0.25, 0.01).value
    assert ls == pytest.approx(math.log(75) / (math.log(75) + math.log(25)), rel=1e-15)
    assert ls == pytest.approx(0.57288, abs=1e-5)
    assert 0.5 < lambda_star(0.25, 1e-300).value < 0.51
    for bad in (0.0, 0.25, 0.3):
        with pytest.raises(DeltaOutOfRange):
            lambda_star(0.25, bad)


def test_one_shot_example():
    P, Q = bernoulli(0.75), bernoulli(0.25)
    e = bayes_error(P, Q, 0.5)
    assert e == pytest.approx(0.25)
    L = one_shot_lower_bound(P, Q, 0.5, e)
    assert L == pytest.approx(0.25 * 0.5 * 0.75, abs=1e-15)
    assert L <= e


def test_one_shot_errors():
    with pytest.raises(DegenerateError):
        one_shot_lower_bound(bernoulli(1.0), bernoulli(0.0), 0.5, 0.1)
    with pytest.raises(DegenerateError):
        one_shot_lower_bound(bernoulli(0.3), bernoulli(0.3), 0.5, 0.1)
    with pytest.raises(PreconditionViolated):
        one_shot_lower_bound(bernoulli(0.75), bernoulli(0.25), 0.5, 0.1)


@settings(max_examples=300, deadline=None)
@given(distribution_pairs(k_max=8), st.floats(1e-3, 0.5))
def test_one_shot_master_property(pair, pi):
    P, Q = pair
    e = bayes_error(P, Q, pi)
    if not (0 < e < pi):
        return
    assert e >= one_shot_lower_bound(P, Q, pi, e) - 1e-12


@settings(max_examples=200, deadline=None)
@given(distribution_pairs(k_max=6), st.floats(1e-3, 0.5), st.floats(0, 1), st.floats(0.01, 0.99))
def test_padding(pair, pi, u, lam):
    P, Q = pair
    e = bayes_error(P, Q, pi)
    delta = e + u * (pi - e)
    if not (0 < e <= delta < pi):
        return
    Pt, Qt, gamma = pad_to_error(P, Q, pi, delta)
    assert Pt.labels[-1] == PAD_LABEL
    assert bayes_error(Pt, Qt, pi) == pytest.approx(delta, abs=1e-12)
    assert hellinger_affinity(Pt, Qt, lam) >= hellinger_affinity(P, Q, lam) - 1e-12
    et = bayes_error(Pt, Qt, pi)
    assert delta >= one_shot_lower_bound(Pt, Qt, pi, et) - 1e-12


def test_padding_examples():
    # a pair with e_pi = 0.1 at pi = 0.5
    P, Q = validate([0.8, 0.2]), validate([0.0, 1.0])
    assert bayes_error(P, Q, 0.5) == pytest.approx(0.1)
    _, _, gamma = pad_to_error(P, Q, 0.5, 0.3)
    assert gamma == pytest.approx(0.5, abs=1e-15)
    Pt, _, gamma = pad_to_error(P, Q, 0.5, 0.1)
    assert gamma == pytest.approx(1.0) and Pt.array[:2] == pytest.approx(P.array)
    _, _, gamma = pad_to_error(P, Q, 0.5, 0.5 - 1e-12)
    assert gamma < 1e-10
    with pytest.raises(DeltaOutOfRange):
        pad_to_error(P, Q, 0.5, 0.05)


def test_upper_bound_edges():
    assert bayes_upper_bound(0.3, 0.4, 0.0) == 0.0
    assert bayes_upper_bound(0.3, 0.0, 1.0) == pytest.approx(0.7)
    assert bayes_upper_bound(0.3, 1.0, 1.0) == pytest.approx(0.3)


def test_upper_bound_dominates_error(rng):
    for _ in range(3000):
        k = int(rng.integers(2, 8))
        P = validate(rng.dirichlet(np.ones(k)).tolist())
        Q = validate(rng.dirichlet(np.ones(k)).tolist())
        pi = float(rng.uniform(0.01, 0.5))
        delta = float(rng.uniform(1e-6, pi * 0.999))
        lam = lambda_star(pi, delta).value
        beta = hellinger_affinity(P, Q, lam)
        assert bayes_error(P, Q, pi) <= bayes_upper_bound(pi, lam, beta) + 1e-15


def test_bernoulli_reduction(rng):
    P = validate([0.3, 0.7])
    assert bernoulli_reduction(P, P, 0.4) == pytest.approx((1.0, 1.0))
    for _ in range(500):
        P = validate(rng.dirichlet(np.ones(6)).tolist())
        Q = validate(rng.dirichlet(np.ones(6)).tolist())
        pi = float(rng.uniform(0.01, 0.5))
        pa, qa = bernoulli_reduction(P, Q, pi)
        Pa, Qa = validate([pa, max(0.0, 1 - pa)]), validate([qa, max(0.0, 1 - qa)])
        assert bayes_error(Pa, Qa, pi) == pytest.approx(bayes_error(P, Q, pi), abs=1e-12)
        lam = float(rng.uniform(0.01, 0.99))
        assert hellinger_affinity(P, Q, lam) <= hellinger_affinity(Pa, Qa, lam) + 1e-12


def test_levelset_sup_examples():
    ls = lambda_star(0.5, 1 / 32).value
    sup = affinity_levelset_sup(0.5, 1 / 32, ls)
    assert sup <= 2 * (1 / 16) ** 0.5
    assert sup <= levelset_sup_bound(0.5, 1 / 32) + 1e-12
    beta = _line1_affinity(0.5, 1 / 32, ls)
    assert sup >= max(beta(0.0), beta(1 / 16))


def test_levelset_sup_grid_oracle():
    pi, delta = 0.3, 0.01
    lam = lambda_star(pi, delta).value
    beta = _line1_affinity(pi, delta, lam)
    grid = np.linspace(0, delta / pi, 1_000_001)
    bar = 1 - pi
    q = np.clip(pi / bar * grid + 1 - delta / bar, 0, 1)
    vals = grid**lam * q ** (1 - lam) + (1 - grid) ** lam * (1 - q) ** (1 - lam)
    assert affinity_levelset_sup(pi, delta, lam) == pytest.approx(vals.max(), abs=1e-9)
    # the level set really has Bayes error delta
    x = 0.5 * delta / pi
    qx = pi / bar * x + 1 - delta / bar
    assert bayes_error(validate([x, 1 - x]), validate([qx, 1 - qx]), pi) == pytest.approx(delta)
    assert one_shot_bound_value(pi, lam, beta(x)) <= delta
