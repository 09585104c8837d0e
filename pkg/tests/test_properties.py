"""Property-based checks of the small algebraic contracts."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from poisonlab.attack import clip, psi
from poisonlab.kde import KdeEstimate, likelihood, likelihood_grad

finite = st.floats(-100.0, 100.0, allow_nan=False, allow_infinity=False)


@given(arrays(np.float64, 6, elements=finite))
@settings(max_examples=50, deadline=None)
def test_clip_idempotent_and_bounded(x):
    lb, ub = np.full(6, -1.0), np.full(6, 1.0)
    once = clip(x, lb, ub)
    assert np.array_equal(clip(once, lb, ub), once)
    assert (once >= lb).all() and (once <= ub).all()


@given(arrays(np.float64, (3, 4), elements=finite),
       arrays(np.float64, 3, elements=st.floats(-5, 5)),
       arrays(np.float64, 3, elements=st.floats(-5, 5)))
@settings(max_examples=50, deadline=None)
def test_psi_is_linear_in_beta(protos, b1, b2):
    lhs = psi(b1 + b2, protos)
    rhs = psi(b1, protos) + psi(b2, protos)
    assert np.allclose(lhs, rhs, rtol=1e-9, atol=1e-9)


@given(arrays(np.float64, (5, 2), elements=st.floats(-3, 3)),
       arrays(np.float64, 2, elements=st.floats(-3, 3)),
       st.floats(0.1, 5.0))
@settings(max_examples=50, deadline=None)
def test_kde_likelihood_in_unit_interval(bank, x, h):
    est = KdeEstimate(bank, h, 0)
    p = likelihood(est, x)
    assert 0.0 < p <= 1.0


@given(arrays(np.float64, (4, 3), elements=st.floats(-3, 3)),
       arrays(np.float64, 3, elements=st.floats(-3, 3)),
       arrays(np.float64, 3, elements=st.floats(-10, 10)))
@settings(max_examples=50, deadline=None)
def test_kde_translation_equivariance(bank, x, shift):
    a = KdeEstimate(bank, 1.0, 0)
    b = KdeEstimate(bank + shift, 1.0, 0)
    assert np.isclose(likelihood(a, x), likelihood(b, x + shift),
                      rtol=1e-10, atol=1e-12)
    assert np.allclose(likelihood_grad(a, x), likelihood_grad(b, x + shift),
                       rtol=1e-9, atol=1e-10)
