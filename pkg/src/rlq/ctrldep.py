"""Equilibrium under control-dependent ambiguity aversion (penalty xi l u_j^2).

Here ``C = 0`` and ``D``, ``R`` are scalars times the identity, so every
investment component solves its own quadratic
``kappa a^2 + beta_j a + gamma = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .certificate import Certificate, Margin, margin_ge, margin_le, merge_constants
from .errors import CertificateError, DegenerateError, SolverError
from .model import CoefficientCache, Mode, ModelSpec, NodeCoeffs, TimeGrid, sample
from .odeint import BackwardProblem, integrate_backward, linear_backward, tail_integral
from .paths import CoeffPath, Policy, p_second_order
from .statedep import _check_mode

__all__ = [
    "QuadCoeffs",
    "quad_coeffs",
    "alpha_ctrl",
    "h_ctrl",
    "rhs_ctrl",
    "solve_ctrl",
    "certify_ctrl",
    "default_constants_ctrl",
    "gamma_closed_form",
    "DISC_TOL",
    "BETA_FLAG",
]

DISC_TOL = 1e-12
BETA_FLAG = 1e-10


@dataclass(frozen=True)
class QuadCoeffs:
    kappa: float
    beta: np.ndarray
    gamma: float


def quad_coeffs(M, Delta, E, D, R, B, xi, l) -> QuadCoeffs:
    D2 = D * D
    return QuadCoeffs(
        kappa=D2 * M + R,
        beta=np.asarray(B, dtype=float) * Delta,
        gamma=D2 * (Delta * E - E * E) / (xi * l),
    )


def alpha_ctrl(q: QuadCoeffs, prev=None, t=None) -> np.ndarray:
    """Pick, per component, the root continuous with the nonzero terminal root.

    ``prev`` is the investment rule at the previously evaluated (later)
    time; it is only consulted when ``beta_j`` vanishes.  Without ``prev``
    a zero ``beta_j`` is an error, as happens at the terminal node.
    """
    kappa, gamma = q.kappa, q.gamma
    if not kappa > 0.0:
        raise SolverError("leading coefficient D^2 M + R is not positive (coefficient system blows up)", t)
    out = np.empty(q.beta.shape)
    for j, b in enumerate(q.beta):
        disc = b * b - 4.0 * kappa * gamma
        if disc < -DISC_TOL:
            raise SolverError(f"no real equilibrium root for component {j + 1}", t)
        disc = max(disc, 0.0)
        if b != 0.0:
            out[j] = (-b - math.copysign(math.sqrt(disc), b)) / (2.0 * kappa)
        elif prev is None:
            raise SolverError(f"beta_{j + 1} = 0 leaves only the zero root", t)
        elif gamma < 0.0:
            out[j] = math.copysign(math.sqrt(-gamma / kappa), prev[j])
        else:
            out[j] = 0.0
    return out


def h_ctrl(alpha, E, D, xi, l, t=None) -> np.ndarray:
    """Worst-case drift distortion ``E D / (xi l alpha_j)``."""
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha == 0.0):
        raise DegenerateError(
            f"zero investment component leaves no ambiguity penalty"
            + ("" if t is None else f" (t={t:.17g})")
        )
    return E * D / (xi * l * alpha)


def rhs_ctrl(t, y, c: NodeCoeffs, xi, prev=None) -> tuple[np.ndarray, np.ndarray]:
    """Derivatives of (L, H, F, M, N, Gamma) and the investment rule used."""
    L, H, F, M, N, Gam = y
    Delta = M - N - Gam
    E = 2.0 * L - H - F
    D = c.D[0, 0]
    l = len(c.B)
    alpha = alpha_ctrl(quad_coeffs(M, Delta, E, D, c.R, c.B, xi, l), prev, t)
    D2 = D * D
    e = D2 * E / xi
    Ba = c.B @ alpha
    aa = alpha @ alpha
    a = c.A + Ba
    mn = 2.0 * c.A + Ba + e
    dy = np.array([
        -(2.0 * a + 2.0 * e + D2 * aa) * L - 0.5 * c.Q - 0.5 * c.R * aa + 0.5 * E * e,
        -(2.0 * a + 2.0 * e) * H,
        -(a + e) * F,
        -mn * M - c.Q,
        -mn * N,
        -c.A * Gam,
    ])
    return dy, alpha


def gamma_closed_form(spec: ModelSpec, t) -> np.ndarray:
    """``mu1 exp(int_t^T A)`` by trapezoid on the nodes ``t``."""
    return spec.mu1 * np.exp(tail_integral(t, spec.A(np.asarray(t))))


def solve_ctrl(spec: ModelSpec, grid: TimeGrid) -> tuple[CoeffPath, Policy]:
    """Integrate the coefficient system backward and assemble the policy."""
    _check_mode(spec, Mode.CTRL_DEP)
    d = spec.d
    if spec.mu1 == 0.0:
        raise DegenerateError(
            "mu1 = 0: the equilibrium is h = 0, u = 0 and carries no ambiguity penalty",
            equilibrium={"alpha": [0.0] * d, "h": [0.0] * d},
        )
    xi = spec.xi
    cache = CoefficientCache(spec, grid.nodes[::-1])
    state = {"prev": None}

    def rhs(t, y):
        dy, alpha = rhs_ctrl(t, y, cache(t), xi, state["prev"])
        state["prev"] = alpha
        return dy

    Y = integrate_backward(
        BackwardProblem(rhs, CoeffPath.terminal(spec.G, spec.nu, spec.mu1), grid)
    )
    coeffs = CoeffPath(grid.nodes, Y)
    s = sample(spec, grid)
    n = grid.steps + 1
    alpha = np.empty((n, d))
    h = np.empty((n, d))
    beta_min = np.inf
    Delta, E = coeffs.Delta, coeffs.E
    prev = None
    for k in range(n - 1, -1, -1):
        D = s.D[k, 0, 0]
        q = quad_coeffs(coeffs.M[k], Delta[k], E[k], D, s.R[k], s.B[k], xi, d)
        alpha[k] = prev = alpha_ctrl(q, prev, s.t[k])
        h[k] = h_ctrl(alpha[k], E[k], D, xi, d, s.t[k])
        if k < n - 1:
            beta_min = min(beta_min, float(np.min(np.abs(q.beta))))
    P = p_second_order(s.t, s.A, s.C, h, s.Q, spec.G, 0.0)
    D2 = s.D[:, 0, 0] ** 2
    sig = s.R[:, None] - xi * d * h * h + (D2 * P)[:, None]
    Sigma = np.zeros((n, d, d))
    Sigma[:, np.arange(d), np.arange(d)] = sig
    standing = float(np.min(d * xi * s.B * s.B))
    meta = {
        "mode": spec.mode.value,
        "G_tilde": spec.G,
        "steps": grid.steps,
        "min_abs_alpha": np.min(np.abs(alpha), axis=0).tolist(),
        "beta_near_zero": bool(beta_min < BETA_FLAG),
        "standing_l_xi_B2": standing,
        "standing_ok": standing > 1.0,
        "gamma_closed_form_err": float(np.max(np.abs(coeffs.Gamma - gamma_closed_form(spec, s.t)))),
    }
    return coeffs, Policy(s.t, alpha, h, P, Sigma, meta)


def default_constants_ctrl(spec: ModelSpec, grid: TimeGrid) -> dict:
    """Small-horizon construction around the terminal values.

    Uses the smallest ``B_j^2`` over the grid; needs ``l xi B^2 > 1``.
    ``phi`` is left to the certifier (half the smallest ``|alpha_j|``).
    """
    s = sample(spec, grid)
    l = spec.d
    B2 = float(np.min(s.B * s.B))
    lxb = l * spec.xi * B2
    if not lxb > 1.0:
        raise CertificateError(f"standing condition l xi B^2 > 1 violated (l xi B^2 = {lxb:.6g})")
    G = spec.G
    eps0 = min(0.5, 1.0 - 1.0 / lxb, spec.mu1 * math.sqrt(B2) / 2.0, lxb - 1.0)
    gap = abs(G - spec.nu - spec.mu1)
    return {
        "m_lo": G * (1.0 - eps0),
        "m_hi": G * (1.0 + eps0),
        "delta_hi": max(float(gamma_closed_form(spec, s.t)[0]), gap),
        "e_hi": gap + eps0 * G,
    }


def _check_constants_ctrl(spec: ModelSpec, grid: TimeGrid, k: dict):
    gap = spec.G - spec.nu - spec.mu1
    if not 0.0 < k["m_lo"] <= spec.G:
        raise CertificateError(f"0 < m_lo <= G violated (m_lo={k['m_lo']:g}, G={spec.G:g})")
    if not spec.G <= k["m_hi"]:
        raise CertificateError(f"G <= m_hi violated (m_hi={k['m_hi']:g}, G={spec.G:g})")
    for name in ("delta_hi", "e_hi"):
        if not -k[name] <= gap <= k[name]:
            raise CertificateError(f"-{name} <= G - nu - mu1 <= {name} violated ({name}={k[name]:g})")
    gam0 = float(gamma_closed_form(spec, grid.nodes)[0])
    if not k["delta_hi"] >= gam0:
        raise CertificateError(
            f"delta_hi >= mu1 exp(int_0^T A) violated (delta_hi={k['delta_hi']:g} < {gam0:g})"
        )
    if "phi" in k and not k["phi"] > 0.0:
        raise CertificateError(f"phi > 0 violated (phi={k['phi']:g})")


def certify_ctrl(spec: ModelSpec, grid: TimeGrid, constants: dict | None = None) -> Certificate:
    """Check the truncation-box, discriminant and admissibility conditions."""
    _check_mode(spec, Mode.CTRL_DEP)
    k = merge_constants(default_constants_ctrl(spec, grid), constants, optional=("phi",))
    _check_constants_ctrl(spec, grid, k)
    xi, l = spec.xi, spec.d
    s = sample(spec, grid)
    t, A, Q, R = s.t, s.A, s.Q, s.R
    D2 = s.D[:, 0, 0] ** 2
    absB = np.abs(s.B)
    base = D2 * k["m_lo"] + R
    de, dd = k["e_hi"], k["delta_hi"]
    abar = absB * dd / base[:, None] + (np.sqrt(D2 * (de * de + dd * de)) / np.sqrt(xi * l * base))[:, None]
    bbar = np.sum(absB * abar, axis=1)
    aa = np.sum(abar * abar, axis=1)
    spread = bbar + D2 * de / xi
    U_L1 = 2 * A - 2 * spread
    U_L0 = Q / 2 - de * de * D2 / (2 * xi)
    V_L1 = 2 * A + 2 * spread + D2 * aa
    V_L0 = Q / 2 + R * aa / 2
    zero = np.zeros_like(t)
    G, nu, mu1 = spec.G, spec.nu, spec.mu1
    env = {
        "L_lo": linear_backward(t, U_L1, U_L0, G / 2),
        "L_hi": linear_backward(t, V_L1, V_L0, G / 2),
        "H_lo": linear_backward(t, 2 * A - 2 * spread, zero, nu),
        "H_hi": linear_backward(t, 2 * A + 2 * spread, zero, nu),
        "F_lo": linear_backward(t, A - spread, zero, mu1),
        "F_hi": linear_backward(t, A + spread, zero, mu1),
        "M_lo": linear_backward(t, 2 * A - spread, Q, G),
        "M_hi": linear_backward(t, 2 * A + spread, Q, G),
        "I_lo": linear_backward(t, 2 * A - spread, Q, G - nu),
        "I_hi": linear_backward(t, 2 * A + spread, Q, G - nu),
        "Gamma": gamma_closed_form(spec, t),
    }
    v = env
    disc = xi * l * s.B * s.B - (D2 * (D2 * k["m_hi"] + R))[:, None]
    margins = [
        margin_ge("L_lo >= 0", t, v["L_lo"], 0.0),
        margin_ge("M_lo >= m_lo", t, v["M_lo"], k["m_lo"]),
        margin_le("M_hi <= m_hi", t, v["M_hi"], k["m_hi"]),
        margin_le("I_hi - Gamma <= delta_hi", t, v["I_hi"] - v["Gamma"], dd),
        margin_ge("I_lo - Gamma >= -delta_hi", t, v["I_lo"] - v["Gamma"], -dd),
        margin_le("2 L_hi - H_lo - F_lo <= e_hi", t, 2 * v["L_hi"] - v["H_lo"] - v["F_lo"], de),
        margin_ge("2 L_lo - H_hi - F_hi >= -e_hi", t, 2 * v["L_lo"] - v["H_hi"] - v["F_hi"], -de),
        margin_ge("discriminant >= 0", t, np.min(disc, axis=1), 0.0),
    ]
    notes = []
    bounds = {"alpha_bar": abar, "b_bar": bbar, "alpha_bar_sq": aa, "discriminant": disc}
    try:
        _, policy = solve_ctrl(spec, grid)
    except SolverError as exc:
        notes.append(f"solve failed: {exc}")
        k.setdefault("phi", math.nan)
        margins += [Margin("Sigma_j >= 0", -math.inf), Margin("|alpha_j| >= phi", -math.inf)]
    else:
        amin = np.min(np.abs(policy.alpha), axis=1)
        k.setdefault("phi", 0.5 * float(np.min(amin)))
        sig = np.diagonal(policy.Sigma, axis1=1, axis2=2)
        margins += [
            margin_ge("Sigma_j >= 0", t, np.min(sig, axis=1), 0.0),
            margin_ge("|alpha_j| >= phi", t, amin, k["phi"]),
        ]
    return Certificate(spec.mode.value, k, margins, t, env, bounds, notes)
