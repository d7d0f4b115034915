import math

import numpy as np
import pytest

from rlq import CertificateError, Mode, TimeGrid, benchmark_spec, certify_ctrl, certify_state
from rlq.certificate import Margin, margin_ge, margin_le
from rlq.ctrldep import default_constants_ctrl
from rlq.statedep import default_constants_state


def test_margin_picks_binding_node():
    t = np.linspace(0, 1, 5)
    m = margin_ge("x >= 0", t, np.array([3.0, 1.0, -2.0, 0.5, 4.0]), 0.0)
    assert (m.slack, m.node, m.t) == (-2.0, 2, 0.5) and not m.ok
    m = margin_le("x <= 1", t, np.zeros(5), 1.0)
    assert m.slack == 1.0 and m.ok


def test_nan_is_failure():
    m = margin_ge("x >= 0", np.linspace(0, 1, 3), np.array([1.0, np.nan, 1.0]), 0.0)
    assert m.slack == -math.inf and m.node == 1 and not m.ok


@pytest.mark.parametrize("slack,strict,ok", [(0.0, False, True), (-1e-13, False, True), (-1e-11, False, False),
                                             (0.0, True, False), (1e-300, True, True)])
def test_tolerance(slack, strict, ok):
    assert Margin("m", slack, strict=strict).ok is ok


def test_state_benchmark_small_horizon_passes():
    spec = benchmark_spec(T=0.02)
    cert = certify_state(spec, TimeGrid(0.02, 2000))
    assert cert.verdict and cert.failed == []
    assert cert.constants == default_constants_state(spec)
    assert cert.to_dict()["verdict"] is True


def test_state_long_horizon_names_margin():
    cert = certify_state(benchmark_spec(T=0.05), TimeGrid(0.05, 2000))
    assert not cert.verdict
    assert [m.name for m in cert.failed] == ["2 L_lo - H_hi - F_hi >= e_lo"]


def test_state_zero_risk_aversion_fails_named():
    # eps0 = 0 collapses the box to M = G, but M grows like e^{2A(T-t)} backward
    cert = certify_state(benchmark_spec(T=0.02, mu1=0.0), TimeGrid(0.02, 2000))
    assert cert.constants == {"m_lo": 1.0, "m_hi": 1.0, "delta_lo": 0.0, "e_lo": 0.0}
    assert not cert.verdict
    assert {"M_hi <= m_hi", "M_hi - N_lo - Gamma_lo <= 0"} <= {m.name for m in cert.failed}
    assert cert.margin("tau > 0").ok and cert.margin("R + D'PD >= 0").ok


@pytest.mark.parametrize("bad", [{"m_lo": 0.0}, {"m_hi": 0.5}, {"delta_lo": 1.0}])
def test_state_bad_constants(bad):
    spec = benchmark_spec(T=0.02)
    with pytest.raises(CertificateError):
        certify_state(spec, TimeGrid(0.02, 100), {**default_constants_state(spec), **bad})


def test_ctrl_benchmark_small_horizon_passes():
    spec = benchmark_spec(mode=Mode.CTRL_DEP, T=0.02)
    cert = certify_ctrl(spec, TimeGrid(0.02, 2000))
    assert cert.verdict
    assert cert.constants["m_hi"] == pytest.approx(2 - 1 / 1.40625)


def test_ctrl_discriminant_failure_is_named():
    spec = benchmark_spec(mode=Mode.CTRL_DEP, T=0.02)
    g = TimeGrid(0.02, 2000)
    k = {**default_constants_ctrl(spec, g), "m_hi": 1.5}
    cert = certify_ctrl(spec, g, k)
    assert [m.name for m in cert.failed] == ["discriminant >= 0"]
    assert cert.margin("discriminant >= 0").slack < 0


def test_ctrl_standing_condition():
    with pytest.raises(CertificateError, match="standing condition"):
        certify_ctrl(benchmark_spec(mode=Mode.CTRL_DEP, xi=1.0, T=0.02), TimeGrid(0.02, 100))


def test_partial_constants_overlay_defaults():
    spec = benchmark_spec(T=0.02)
    g = TimeGrid(0.02, 500)
    cert = certify_state(spec, g, {"m_hi": 2.0})
    assert cert.constants == {**default_constants_state(spec), "m_hi": 2.0}


@pytest.mark.parametrize("bad", [{"bogus": 1.0}, {"m_hi": "big"}, {"m_hi": float("nan")}])
def test_constants_rejected(bad):
    with pytest.raises(CertificateError):
        certify_state(benchmark_spec(T=0.02), TimeGrid(0.02, 100), bad)
