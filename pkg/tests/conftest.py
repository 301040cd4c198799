import numpy as np
import pytest
from hypothesis import strategies as st

from hypotest.distributions import validate


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def _normalise(ws):
    w = np.asarray(ws, dtype=float)
    w = w / w.sum()
    return validate(w.tolist())


@st.composite
def distribution_pairs(draw, k_min=2, k_max=6, allow_zeros=True):
    k = draw(st.integers(k_min, k_max))
    # masses are either exactly zero or at least 1e-6: subnormal masses only test float underflow
    atom = st.one_of(st.just(0.0), st.floats(1e-6, 1.0)) if allow_zeros else st.floats(0.01, 1.0)
    weights = st.lists(atom, min_size=k, max_size=k).filter(lambda w: sum(w) > 0.05)
    return _normalise(draw(weights)), _normalise(draw(weights))
