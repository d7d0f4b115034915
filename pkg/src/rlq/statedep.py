"""Equilibrium under state-dependent ambiguity aversion (penalty xi X^2)."""

from __future__ import annotations

import numpy as np

from .certificate import Certificate, Margin, margin_ge, margin_le, merge_constants
from .errors import CertificateError, SolverError, ValidationError
from .model import CoefficientCache, Mode, ModelSpec, NodeCoeffs, TimeGrid, sample, validate
from .odeint import BackwardProblem, integrate_backward, linear_backward
from .paths import CoeffPath, Policy, p_second_order

__all__ = [
    "alpha_state",
    "h_state",
    "rhs_state",
    "solve_state",
    "certify_state",
    "default_constants_state",
    "state_bounds",
    "MAX_COND",
]

MAX_COND = 1e12
# The matrix is positive definite at T; reaching a non-positive-definite
# value means a stage crossed a pole of the investment rule.
_LOST_PD = "investment matrix is not positive definite (coefficient system blows up)"


def alpha_state(c: NodeCoeffs, M, Delta, E, xi, t=None) -> np.ndarray:
    """Investment rule: ``-(R + k D'D)^{-1} (k D'C + B Delta)`` with ``k = M + Delta E / xi``."""
    kappa = M + Delta * E / xi
    D = c.D
    if D.shape == (1, 1):
        w = c.R + kappa * D[0, 0] ** 2
        if not w > 0.0:
            raise SolverError(_LOST_PD, t)
        return np.array([-(kappa * D[0, 0] * c.C[0] + c.B[0] * Delta) / w])
    W = c.R * np.eye(len(c.B)) + kappa * (D.T @ D)
    eig = np.linalg.eigvalsh(W)
    if not eig[0] > 0.0:
        raise SolverError(_LOST_PD, t)
    if eig[-1] / eig[0] > MAX_COND:
        raise SolverError("ill-conditioned investment matrix", t)
    return -np.linalg.solve(W, kappa * (D.T @ c.C) + c.B * Delta)


def h_state(alpha, E, C, D, xi) -> np.ndarray:
    """Worst-case drift distortion ``(E / xi)(C + D alpha)``."""
    return (E / xi) * (np.asarray(C) + np.asarray(D) @ np.asarray(alpha))


def rhs_state(t, y, c: NodeCoeffs, xi) -> np.ndarray:
    """Time derivatives of (L, H, F, M, N, Gamma) with h eliminated."""
    L, H, F, M, N, Gam = y
    Delta = M - N - Gam
    E = 2.0 * L - H - F
    alpha = alpha_state(c, M, Delta, E, xi, t)
    Da = c.D @ alpha
    v = c.C + Da
    vv = v @ v
    e = E / xi
    a = c.A + c.B @ alpha
    Cv = c.C @ v
    bracket_n = 2.0 * c.A + c.B @ alpha + e * ((c.C + v) @ v)
    return np.array([
        -(2.0 * a + (2.0 * e + 1.0) * vv) * L - 0.5 * c.Q - 0.5 * c.R * (alpha @ alpha) + 0.5 * E * e * vv,
        -(2.0 * a + 2.0 * e * vv) * H,
        -(a + e * vv) * F,
        -(bracket_n + Cv) * M - c.Q + E * e * vv,
        -bracket_n * N,
        -(c.A + e * Cv) * Gam,
    ])


def _check_mode(spec: ModelSpec, mode: Mode):
    if spec.mode is not mode:
        raise ValidationError(f"mode: expected {mode.value}, got {spec.mode.value}")
    violations = validate(spec)
    if violations:
        raise ValidationError("; ".join(map(str, violations)), violations)


def solve_state(spec: ModelSpec, grid: TimeGrid) -> tuple[CoeffPath, Policy]:
    """Integrate the coefficient system backward and assemble the policy."""
    _check_mode(spec, Mode.STATE_DEP)
    xi = spec.xi
    cache = CoefficientCache(spec, grid.nodes[::-1])
    problem = BackwardProblem(
        rhs=lambda t, y: rhs_state(t, y, cache(t), xi),
        terminal=CoeffPath.terminal(spec.G, spec.nu, spec.mu1),
        grid=grid,
    )
    Y = integrate_backward(problem)
    coeffs = CoeffPath(grid.nodes, Y)
    s = sample(spec, grid)
    n, d = grid.steps + 1, spec.d
    alpha = np.empty((n, d))
    h = np.empty((n, d))
    Delta, E = coeffs.Delta, coeffs.E
    for k in range(n):
        c = s.node(k)
        alpha[k] = alpha_state(c, coeffs.M[k], Delta[k], E[k], xi, s.t[k])
        h[k] = h_state(alpha[k], E[k], c.C, c.D, xi)
    c_zero = all(sc.is_zero() for sc in spec.C)
    G_tilde = spec.G if c_zero else spec.G - spec.nu
    P = p_second_order(s.t, s.A, s.C, h, s.Q, G_tilde, xi)
    Sigma = s.R[:, None, None] * np.eye(d) + P[:, None, None] * np.einsum("nji,njk->nik", s.D, s.D)
    meta = {"mode": spec.mode.value, "G_tilde": G_tilde, "steps": grid.steps}
    return coeffs, Policy(s.t, alpha, h, P, Sigma, meta)


def default_constants_state(spec: ModelSpec) -> dict:
    """Small-horizon construction: a box of half-width ``eps0 G`` around the terminal values."""
    G = spec.G
    eps0 = min(0.5, spec.mu1)
    gap = G - spec.nu - spec.mu1
    return {
        "m_lo": G * (1.0 - eps0),
        "m_hi": G * (1.0 + eps0),
        "delta_lo": gap - eps0 * G,
        "e_lo": gap - eps0 * G,
    }


def _check_constants_state(spec: ModelSpec, k: dict):
    gap = spec.G - spec.nu - spec.mu1
    if not 0.0 < k["m_lo"] <= spec.G:
        raise CertificateError(f"0 < m_lo <= G violated (m_lo={k['m_lo']:g}, G={spec.G:g})")
    if not spec.G <= k["m_hi"]:
        raise CertificateError(f"G <= m_hi violated (m_hi={k['m_hi']:g}, G={spec.G:g})")
    if not gap <= 0.0:
        raise CertificateError(f"G - nu - mu1 <= 0 violated (G - nu - mu1 = {gap:g})")
    for name in ("delta_lo", "e_lo"):
        if not k[name] <= gap:
            raise CertificateError(f"{name} <= G - nu - mu1 violated ({name}={k[name]:g})")


def state_bounds(s, k: dict, xi: float) -> dict:
    """Solution-independent bounds on B'a, C'Da, a'D'Da and a'Ra per node."""
    d = s.B.shape[1]
    eye = np.eye(d)
    DtD = np.einsum("nji,njk->nik", s.D, s.D)
    Rm = s.R[:, None, None] * eye
    W_lo = Rm + k["m_lo"] * DtD
    kbar = k["m_hi"] + k["delta_lo"] * k["e_lo"] / xi
    W_hi = Rm + kbar * DtD
    tau = np.linalg.eigvalsh(W_lo)[:, 0]
    out = {"tau": tau}
    if not np.all(tau > 0.0):
        return out
    Wi = np.linalg.inv(W_lo)
    Whi = np.linalg.inv(W_hi)
    DtC = np.einsum("nji,nj->ni", s.D, s.C)
    WiB = np.einsum("nij,nj->ni", Wi, s.B)
    WiDC = np.einsum("nij,nj->ni", Wi, DtC)
    bB = np.sum(s.B * WiB, axis=1)
    cC = np.sum(DtC * WiDC, axis=1)
    dl = k["delta_lo"]
    both = bB + cC
    quad = lambda x, Mx: np.einsum("ni,nij,nj->n", x, Mx, x)  # noqa: E731
    out.update(
        b_lo=-kbar * both / 2.0,
        b_hi=kbar * both / 2.0 - dl * bB,
        c_lo=-kbar * cC + dl * both / 2.0,
        c_hi=-k["m_lo"] * quad(DtC, Whi) - dl * both / 2.0,
        d_hi=2.0 * dl**2 * quad(WiB, DtD) + 2.0 * kbar**2 * quad(WiDC, DtD),
        r_hi=2.0 * dl**2 * quad(WiB, Rm) + 2.0 * kbar**2 * quad(WiDC, Rm),
    )
    return out


def certify_state(spec: ModelSpec, grid: TimeGrid, constants: dict | None = None) -> Certificate:
    """Check the truncation-box conditions and the second-order condition.

    The envelopes use only the coefficients and constants; the condition
    ``R + D'P(t;t)D >= 0`` uses the solved policy.
    """
    _check_mode(spec, Mode.STATE_DEP)
    k = merge_constants(default_constants_state(spec), constants)
    _check_constants_state(spec, k)
    xi = spec.xi
    s = sample(spec, grid)
    t = s.t
    b = state_bounds(s, k, xi)
    margins = [margin_ge("tau > 0", t, b["tau"], 0.0, strict=True)]
    env = {}
    if "b_lo" in b:
        A, Q = s.A, s.Q
        CC = np.sum(s.C * s.C, axis=1)
        e = k["e_lo"]
        S = CC + 2.0 * b["c_hi"] + b["d_hi"]
        U_L1 = 2 * A + 2 * b["b_lo"] + 2 * e * S / xi
        U_L0 = Q / 2 - e * e * S / (2 * xi)
        V_L1 = 2 * A + 2 * b["b_hi"] + S
        V_L0 = Q / 2 + b["r_hi"] / 2
        U_H1, V_H1 = U_L1, 2 * A + 2 * b["b_hi"]
        U_F1, V_F1 = A + b["b_lo"] + e * S / xi, A + b["b_hi"]
        U_N1 = 2 * A + b["b_lo"] + e * np.maximum(2 * CC + 3 * b["c_hi"] + b["d_hi"], 0.0) / xi
        V_N1 = 2 * A + b["b_hi"] + e * np.minimum(2 * CC + 3 * b["c_lo"], 0.0) / xi
        U_M1, V_M1 = U_N1 + CC + b["c_lo"], V_N1 + CC + b["c_hi"]
        U_M0, V_M0 = Q - e * e * S / xi, Q
        U_G1 = A + e * np.maximum(CC + b["c_hi"], 0.0) / xi
        V_G1 = A + e * np.minimum(CC + b["c_lo"], 0.0) / xi
        G, nu, mu1 = spec.G, spec.nu, spec.mu1
        zero = np.zeros_like(t)
        env = {
            "L_lo": linear_backward(t, U_L1, U_L0, G / 2),
            "L_hi": linear_backward(t, V_L1, V_L0, G / 2),
            "H_lo": linear_backward(t, U_H1, zero, nu),
            "H_hi": linear_backward(t, V_H1, zero, nu),
            "F_lo": linear_backward(t, U_F1, zero, mu1),
            "F_hi": linear_backward(t, V_F1, zero, mu1),
            "M_lo": linear_backward(t, U_M1, U_M0, G),
            "M_hi": linear_backward(t, V_M1, V_M0, G),
            "N_lo": linear_backward(t, U_N1, zero, nu),
            "N_hi": linear_backward(t, V_N1, zero, nu),
            "Gamma_lo": linear_backward(t, U_G1, zero, mu1),
            "Gamma_hi": linear_backward(t, V_G1, zero, mu1),
        }
        v = env
        margins += [
            margin_ge("L_lo >= 0", t, v["L_lo"], 0.0),
            margin_ge("M_lo >= m_lo", t, v["M_lo"], k["m_lo"]),
            margin_le("M_hi <= m_hi", t, v["M_hi"], k["m_hi"]),
            margin_le("M_hi - N_lo - Gamma_lo <= 0", t, v["M_hi"] - v["N_lo"] - v["Gamma_lo"], 0.0),
            margin_ge("M_lo - N_hi - Gamma_hi >= delta_lo", t, v["M_lo"] - v["N_hi"] - v["Gamma_hi"], k["delta_lo"]),
            margin_le("2 L_hi - H_lo - F_lo <= 0", t, 2 * v["L_hi"] - v["H_lo"] - v["F_lo"], 0.0),
            margin_ge("2 L_lo - H_hi - F_hi >= e_lo", t, 2 * v["L_lo"] - v["H_hi"] - v["F_hi"], k["e_lo"]),
        ]
    notes = []
    try:
        _, policy = solve_state(spec, grid)
        margins.append(margin_ge("R + D'PD >= 0", t, policy.Sigma_min, 0.0))
    except SolverError as exc:
        notes.append(f"solve failed: {exc}")
        margins.append(Margin("R + D'PD >= 0", -np.inf))
    return Certificate(spec.mode.value, k, margins, t, env, b, notes)
