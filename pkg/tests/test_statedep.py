import numpy as np
import pytest

import oracles
from rlq import Mode, ModelSpec, SolverError, TimeGrid, ValidationError, benchmark_spec, solve_state
from rlq.odeint import linear_backward

# Independent DOP853 solution of the unsimplified system (tests/oracles.py), frozen.
ALPHA0_BENCH = 0.5375193418450516
H0_BENCH = -0.11065094221612956


def test_benchmark_against_frozen_oracle(bench_state):
    _, _, p = bench_state
    assert p.alpha[0, 0] == pytest.approx(ALPHA0_BENCH, abs=1e-12)
    assert p.h[0, 0] == pytest.approx(H0_BENCH, abs=1e-12)


@pytest.mark.parametrize(
    "C,D,Q,R,G",
    [(0.0, 1.0, 0.0, 0.0, 1.0), (0.1, 1.2, 0.05, 0.1, 1.5), (-0.2, 0.8, 0.0, 0.3, 2.0)],
)
def test_paths_match_oracle(C, D, Q, R, G):
    spec = benchmark_spec(C=C, D=D, Q=Q, R=R, G=G)
    coeffs, p = solve_state(spec, TimeGrid(1.0, 2000))
    t = p.t[::200]
    _, y, a, h = oracles.state_dep(0.02, 0.375, C, D, Q, R, G, 1.0, 2.0, 10.0, t_eval=t)
    np.testing.assert_allclose(coeffs.values[::200].T, y, atol=1e-10)
    np.testing.assert_allclose(p.alpha[::200, 0], a, atol=1e-10)
    np.testing.assert_allclose(p.h[::200, 0], h, atol=1e-10)


@pytest.mark.parametrize("mu1,xi", [(0.5, 1.0), (2.0, 10.0), (5.0, 10.0), (2.0, 100.0)])
def test_terminal_rule(mu1, xi, grid):
    _, p = solve_state(benchmark_spec(mu1=mu1, xi=xi), grid)
    B = 0.375
    assert p.alpha[-1, 0] == pytest.approx(mu1 * B / (1 + mu1**2 / xi), abs=1e-12)
    assert p.h[-1, 0] == pytest.approx(-mu1 / xi * p.alpha[-1, 0], abs=1e-12)


def test_second_asset_without_premium_is_idle(bench_state, grid):
    _, _, p1 = bench_state
    spec = ModelSpec(mode=Mode.STATE_DEP, T=1, x0=1, A=0.02, B=[0.375, 0.0], G=1, nu=1, mu1=2, xi=10,
                     D=[1.0, 1.0])
    _, p2 = solve_state(spec, grid)
    np.testing.assert_allclose(p2.alpha[:, 1], 0.0, atol=1e-15)
    np.testing.assert_allclose(p2.alpha[:, 0], p1.alpha[:, 0], atol=1e-13)


def test_second_order_term_by_quadrature(bench_state):
    _, _, p = bench_state
    # C = 0: P solves a linear ODE with rate 2A and source -xi |h|^2, terminal G.
    t = p.t
    P = linear_backward(t, np.full_like(t, 0.04), -10.0 * p.h[:, 0] ** 2, 1.0)
    np.testing.assert_allclose(p.P, P, atol=1e-14)
    np.testing.assert_allclose(p.Sigma_min, p.P, atol=1e-14)


def test_rejects_ctrl_mode(grid):
    with pytest.raises(ValidationError):
        solve_state(benchmark_spec(mode=Mode.CTRL_DEP), grid)


def test_blow_up_is_reported(grid):
    # oracle: kappa reaches 0 near t = 0.84 for mu1 = 10, xi = 200
    with pytest.raises(SolverError, match="not positive definite") as info:
        solve_state(benchmark_spec(mu1=10.0, xi=200.0), grid)
    assert 0.7 < info.value.t < 0.95


def test_zero_risk_aversion_gives_zero_policy(grid):
    _, p = solve_state(benchmark_spec(mu1=0.0), grid)
    assert np.max(np.abs(p.alpha)) == 0.0 and np.max(np.abs(p.h)) == 0.0


def test_rk4_order_statedep():
    spec = benchmark_spec()
    ref = oracles.state_dep(0.02, 0.375, 0, 1, 0, 0, 1, 1, 2.0, 10.0, t_eval=[0.0, 1.0])[1][:, 0]
    errs = [np.max(np.abs(solve_state(spec, TimeGrid(1.0, n))[0].values[0] - ref)) for n in (10, 20)]
    assert 12 <= errs[0] / errs[1] <= 20
