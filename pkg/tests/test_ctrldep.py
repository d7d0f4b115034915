import math

import numpy as np
import pytest

import oracles
from rlq import DegenerateError, Mode, SolverError, TimeGrid, ValidationError, benchmark_spec, solve_ctrl
from rlq.ctrldep import QuadCoeffs, alpha_ctrl, gamma_closed_form, h_ctrl

ALPHA0_BENCH = 0.6671549223353888
H0_BENCH = -0.29421330950958613


def test_benchmark_against_frozen_oracle(bench_ctrl):
    _, _, p = bench_ctrl
    assert p.alpha[0, 0] == pytest.approx(ALPHA0_BENCH, abs=1e-12)
    assert p.h[0, 0] == pytest.approx(H0_BENCH, abs=1e-12)


@pytest.mark.parametrize("mu1,xi,D,R", [(2.0, 10.0, 1.0, 0.0), (0.5, 20.0, 1.0, 0.1), (5.0, 100.0, 1.3, 0.0)])
def test_paths_match_oracle(mu1, xi, D, R):
    spec = benchmark_spec(mode=Mode.CTRL_DEP, mu1=mu1, xi=xi, D=D, R=R)
    coeffs, p = solve_ctrl(spec, TimeGrid(1.0, 2000))
    t = p.t[::250]
    _, y, a, h = oracles.ctrl_dep(0.02, 0.375, D, 0.0, R, 1.0, 1.0, mu1, xi, t_eval=t)
    np.testing.assert_allclose(coeffs.values[::250].T, y, atol=1e-10)
    np.testing.assert_allclose(p.alpha[::250, 0], a, atol=1e-10)
    np.testing.assert_allclose(p.h[::250, 0], h, atol=1e-10)


def test_terminal_values(bench_ctrl):
    _, _, p = bench_ctrl
    assert p.alpha[-1, 0] == pytest.approx(0.75, abs=1e-12)
    assert p.h[-1, 0] == pytest.approx(-1 / (10 * 0.375), abs=1e-12)


def test_gamma_closed_form(bench_ctrl):
    spec, coeffs, p = bench_ctrl
    np.testing.assert_allclose(coeffs.Gamma, 2.0 * np.exp(0.02 * (1 - p.t)), rtol=1e-13)
    assert p.meta["gamma_closed_form_err"] < 1e-12
    np.testing.assert_allclose(gamma_closed_form(spec, p.t), coeffs.Gamma, rtol=1e-13)


def test_standing_condition_reported(bench_ctrl, grid):
    _, _, p = bench_ctrl
    assert p.meta["standing_l_xi_B2"] == pytest.approx(1.40625)
    assert p.meta["standing_ok"]


def test_sigma_terminal_closed_form(bench_ctrl):
    _, _, p = bench_ctrl
    # D^2 G - 1 / (l xi B^2)
    assert p.Sigma[-1, 0, 0] == pytest.approx(1 - 1 / 1.40625, abs=1e-12)


def test_zero_risk_aversion_is_degenerate(grid):
    with pytest.raises(DegenerateError) as info:
        solve_ctrl(benchmark_spec(mode=Mode.CTRL_DEP, mu1=0.0), grid)
    assert info.value.equilibrium == {"alpha": [0.0], "h": [0.0]}


def test_rejects_nonzero_c(grid):
    with pytest.raises(ValidationError, match="C must be 0"):
        solve_ctrl(benchmark_spec(mode=Mode.CTRL_DEP, C=0.1), grid)


def test_low_ambiguity_aversion_fails_honestly(grid):
    # l xi B^2 < 1; the adaptive oracle also stalls near t = 0.42 with L diverging
    with pytest.raises(SolverError) as info:
        solve_ctrl(benchmark_spec(mode=Mode.CTRL_DEP, mu1=2.0, xi=1.0), grid)
    assert 0.40 < info.value.t < 0.43


@pytest.mark.parametrize("beta", [0.3, -0.3])
def test_root_is_the_nonzero_terminal_one(beta):
    # gamma = 0 at the terminal time: roots 0 and -beta/kappa
    a = alpha_ctrl(QuadCoeffs(1.0, np.array([beta]), 0.0))
    assert a[0] == pytest.approx(-beta)


@pytest.mark.parametrize("prev", [0.4, -0.4])
def test_zero_beta_continues_previous_sign(prev):
    a = alpha_ctrl(QuadCoeffs(1.0, np.array([0.0]), -0.04), prev=np.array([prev]))
    assert a[0] == pytest.approx(math.copysign(0.2, prev))


def test_zero_beta_without_history_raises():
    with pytest.raises(SolverError):
        alpha_ctrl(QuadCoeffs(1.0, np.array([0.0]), -0.04))


def test_nonpositive_kappa_raises():
    with pytest.raises(SolverError, match="not positive"):
        alpha_ctrl(QuadCoeffs(0.0, np.array([0.3]), -0.01))


def test_zero_alpha_is_degenerate():
    with pytest.raises(DegenerateError):
        h_ctrl(np.array([0.0]), -2.0, 1.0, 10.0, 1)


def test_rk4_order_ctrldep():
    spec = benchmark_spec(mode=Mode.CTRL_DEP)
    ref = oracles.ctrl_dep(0.02, 0.375, 1.0, 0.0, 0.0, 1.0, 1.0, 2.0, 10.0, t_eval=[0.0, 1.0])[1][:, 0]
    errs = [np.max(np.abs(solve_ctrl(spec, TimeGrid(1.0, n))[0].values[0] - ref)) for n in (10, 20)]
    assert 12 <= errs[0] / errs[1] <= 20
