import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypotest.distributions import Channel, align, bernoulli, pushforward, validate
from hypotest.divergences import (
    DivergenceSpec,
    TvLikeParams,
    affinity,
    chi2_spec,
    f_divergence,
    hellinger,
    hellinger_affinity,
    hellinger_generator,
    hellinger_spec,
    hellinger_tvlike_params,
    kl_spec,
    tensorized_affinity,
    total_variation,
    tv_spec,
)
from hypotest.errors import LambdaOutOfRange, ValidationError

from conftest import distribution_pairs

H_HALF_EXAMPLE = 1 - (math.sqrt(0.5 * 0.25) + math.sqrt(0.5 * 0.75))


@pytest.mark.parametrize("spec", [tv_spec(), kl_spec(), chi2_spec(), hellinger_spec(0.3)])
def test_self_divergence_is_zero(spec):
    P = validate([0.2, 0.5, 0.3])
    assert f_divergence(P, P, spec) == pytest.approx(0, abs=1e-15)


def test_tv_disjoint():
    assert f_divergence(bernoulli(1.0), bernoulli(0.0), tv_spec()) == 1.0
    assert total_variation(bernoulli(1.0), bernoulli(0.0)) == 1.0


def test_hellinger_bernoulli_example():
    P, Q = bernoulli(0.5), bernoulli(0.25)
    assert hellinger(P, Q, 0.5) == pytest.approx(H_HALF_EXAMPLE, abs=1e-15)
    assert hellinger_affinity(P, Q, 0.5) == pytest.approx(0.96592582628906831, abs=1e-15)
    assert f_divergence(P, Q, hellinger_spec(0.5)) == pytest.approx(H_HALF_EXAMPLE, abs=1e-15)


def test_affinity_edge_cases():
    P = validate([0.3, 0.7])
    for lam in (0.1, 0.5, 0.9):
        assert hellinger_affinity(P, P, lam) == pytest.approx(1, abs=1e-15)
        assert hellinger_affinity(bernoulli(1.0), bernoulli(0.0), lam) == 0.0


@pytest.mark.parametrize("lam", [0.0, 1.0, -0.2, 1.5])
def test_lambda_range(lam):
    with pytest.raises(LambdaOutOfRange):
        hellinger_affinity(bernoulli(0.5), bernoulli(0.2), lam)


def test_tensorized_affinity():
    assert tensorized_affinity(1.0, 7) == 1.0
    assert tensorized_affinity(0.5, 3) == pytest.approx(0.125, abs=1e-16)
    P, Q = bernoulli(0.5), bernoulli(0.25)
    _, p, q = align(P, Q)
    pn = np.array([np.prod(s) for s in itertools.product(p, repeat=4)])
    qn = np.array([np.prod(s) for s in itertools.product(q, repeat=4)])
    assert affinity(pn, qn, 0.5) == pytest.approx(hellinger_affinity(P, Q, 0.5) ** 4, abs=1e-10)


def test_tvlike_constants_at_half():
    t = hellinger_tvlike_params(0.5)
    assert (t.b, t.B, t.C2) == (2.0, 1.0, 1.0)
    assert t.C1 == pytest.approx((1 - math.sqrt(2 / 3)) / 8, rel=1e-15)
    assert t.C1 == pytest.approx(0.02293, abs=1e-5)


def test_generator_bounded_on_initial_interval():
    f = hellinger_generator(0.7)
    x = np.linspace(0, 1 / 0.7, 100_001)
    assert f(x).max() <= 1 + 1e-12


def test_lower_linear_constant_fails_for_large_lambda():
    # the linear lower constant is only valid up to lambda ~ 0.587
    assert hellinger_spec(0.5).tvlike is not None
    assert hellinger_spec(0.58).tvlike is not None
    assert hellinger_spec(0.7).tvlike is None
    f = hellinger_generator(0.9)
    t = hellinger_tvlike_params(0.9)
    x = 1 / 0.9 * 1.001
    assert f(np.array([x]))[0] < t.C1 * x


def test_spec_rejects_bad_generator():
    with pytest.raises(ValidationError):
        DivergenceSpec("bad", lambda x: np.asarray(x) ** 2, math.inf)
    with pytest.raises(ValidationError):
        DivergenceSpec("concave", lambda x: -((np.asarray(x, dtype=float) - 1) ** 2), 0.0)
    with pytest.raises(ValidationError):
        DivergenceSpec("tv", tv_spec().f, 0.5, TvLikeParams(2.0, 0.1, 0.25, 0.5))


def test_kl_infinite_on_support_mismatch():
    assert f_divergence(bernoulli(0.5), bernoulli(0.0), kl_spec()) == math.inf


@settings(max_examples=200, deadline=None)
@given(distribution_pairs(), st.floats(0.01, 0.99))
def test_hellinger_is_one_minus_affinity(pair, lam):
    P, Q = pair
    assert hellinger(P, Q, lam) == pytest.approx(1 - hellinger_affinity(P, Q, lam), abs=1e-14)


@settings(max_examples=200, deadline=None)
@given(distribution_pairs(), st.floats(0.01, 0.98), st.floats(0.01, 0.98))
def test_inter_lambda_sandwich(pair, a, b):
    P, Q = pair
    a, b = sorted((a, b))
    if b - a < 1e-6:
        return
    ha, hb = hellinger(P, Q, a), hellinger(P, Q, b)
    assert a / b * hb <= ha + 1e-12
    assert ha <= (1 - a) / (1 - b) * hb + 1e-12


def test_data_processing(rng):
    for _ in range(2000):
        k, d = int(rng.integers(2, 7)), int(rng.integers(1, 5))
        P = validate(rng.dirichlet(np.ones(k)).tolist())
        Q = validate(rng.dirichlet(np.ones(k)).tolist())
        T = Channel(rng.dirichlet(np.ones(d), size=k))
        lam = float(rng.uniform(0.01, 0.99))
        assert hellinger(pushforward(P, T), pushforward(Q, T), lam) <= hellinger(P, Q, lam) + 1e-12


def test_joint_convexity(rng):
    specs = [tv_spec(), hellinger_spec(0.3), hellinger_spec(0.8), kl_spec(), chi2_spec()]
    for _ in range(500):
        k = int(rng.integers(2, 6))
        ps = [rng.dirichlet(np.ones(k)) for _ in range(4)]
        t = float(rng.uniform())
        P1, Q1, P2, Q2 = (validate(x.tolist()) for x in ps)
        Pm = validate((t * ps[0] + (1 - t) * ps[2]).tolist())
        Qm = validate((t * ps[1] + (1 - t) * ps[3]).tolist())
        for spec in specs:
            mix = t * f_divergence(P1, Q1, spec) + (1 - t) * f_divergence(P2, Q2, spec)
            assert f_divergence(Pm, Qm, spec) <= mix + 1e-12 * max(1.0, mix)


def test_power_mapping_bound():
    # 1 - (1 - x^2)^(1/lam) <= 4 sqrt(2) x on (0, sqrt(1/2)] for lam in [1/2, 1)
    x = np.linspace(1e-9, math.sqrt(0.5), 20_001)
    for lam in np.linspace(0.5, 0.999, 60):
        assert np.all(1 - (1 - x**2) ** (1 / lam) <= 4 * math.sqrt(2) * x)


def test_small_hellinger_is_accurate():
    eps = 1e-9
    P = validate([0.5 + eps, 0.5 - eps])
    Q = validate([0.5, 0.5])
    # second-order expansion: lam (1-lam)/2 * chi2 with chi2 = 8 eps^2
    lam = 0.5
    assert hellinger(P, Q, lam) == pytest.approx(lam * (1 - lam) / 2 * 8 * eps**2, rel=1e-6)
