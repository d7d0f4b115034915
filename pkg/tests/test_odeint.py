import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rlq.errors import IntegrationError
from rlq.odeint import linear_backward, rk4, tail_integral


@pytest.mark.parametrize("lam", [-1.0, 0.5, 2.0])
def test_rk4_order(lam):
    errs = []
    for n in (20, 40):
        t = np.linspace(0, 1, n + 1)
        y = rk4(lambda s, y: lam * y, np.array([1.0]), t)
        errs.append(abs(y[-1, 0] - np.exp(lam)))
    assert 12 <= errs[0] / errs[1] <= 20


def test_rk4_backward_direction():
    t = np.linspace(1, 0, 51)
    y = rk4(lambda s, y: -y, np.array([1.0]), t)
    assert y[-1, 0] == pytest.approx(np.e, rel=1e-8)


def test_rk4_reports_stage():
    with pytest.raises(IntegrationError) as info, np.errstate(divide="ignore"):
        rk4(lambda s, y: y / (0.5 - s), np.array([1.0]), np.linspace(0, 1, 11))
    assert info.value.node is not None and info.value.stage in {"k1", "k2", "k3", "k4"}


def test_tail_integral_exact_for_linear():
    t = np.linspace(0, 2, 11)
    K = tail_integral(t, 3 * t)
    np.testing.assert_allclose(K, 1.5 * (4 - t * t), atol=1e-13)


@settings(max_examples=30, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2))
def test_linear_backward_matches_exact(c1, c0, zT):
    t = np.linspace(0, 1, 4001)
    z = linear_backward(t, np.full_like(t, c1), np.full_like(t, c0), zT)
    tau = 1 - t
    exact = zT * np.exp(c1 * tau) + (c0 * tau if c1 == 0 else c0 * np.expm1(c1 * tau) / c1)
    np.testing.assert_allclose(z, exact, rtol=1e-6, atol=1e-6)


def test_linear_backward_large_exponent_is_finite():
    t = np.linspace(0, 1, 101)
    z = linear_backward(t, np.full_like(t, -800.0), np.ones_like(t), 1.0)
    assert np.all(np.isfinite(z))
