"""Independent checks of a solved equilibrium.

* algebraic first-order residuals and the second-order matrix,
* a change-of-measure Monte Carlo of terminal wealth moments,
* spike-variation difference quotients at ``t = 0``, with the objective
  evaluated exactly through linear moment ODEs.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ValidationError
from .model import Mode, ModelSpec, sample_at
from .mv import terminal_stats
from .paths import CoeffPath, Policy

__all__ = [
    "Residuals",
    "residuals",
    "McReport",
    "mc_cross_check",
    "SpikeReport",
    "spike_quotients",
    "spike_quotient",
    "spike_report",
    "predicted_limit",
]


# -- first-order conditions ----------------------------------------------------


@dataclass(frozen=True)
class Residuals:
    rho_zeta: float
    rho_x: float
    sigma_min: float

    def ok(self, tol=1e-8, sigma_tol=1e-10) -> bool:
        return self.rho_zeta < tol and self.rho_x < tol and self.sigma_min >= -sigma_tol


def residuals(coeffs: CoeffPath, policy: Policy, spec: ModelSpec) -> Residuals:
    """Largest first-order residuals per unit state and the smallest second-order eigenvalue."""
    s = sample_at(spec, policy.t)
    alpha, h = policy.alpha, policy.h
    M, Delta, E = coeffs.M, coeffs.Delta, coeffs.E
    xi = spec.xi
    if spec.mode is Mode.STATE_DEP:
        v = s.C + np.einsum("nij,nj->ni", s.D, alpha)
        rz = E[:, None] * v - xi * h
        Dt = lambda x: np.einsum("nji,nj->ni", s.D, x)  # noqa: E731
        rx = (s.B * Delta[:, None] + Dt(v) * M[:, None] + Dt(h) * Delta[:, None]
              + s.R[:, None] * alpha)
    else:
        l = spec.d
        D = s.D[:, 0, 0][:, None]
        rz = E[:, None] * D * alpha - xi * l * alpha**2 * h
        rx = ((D**2 * M[:, None] + s.R[:, None]) * alpha + s.B * Delta[:, None]
              + D**2 * (Delta * E - E * E)[:, None] / (xi * l * alpha))
    return Residuals(
        float(np.max(np.abs(rz))),
        float(np.max(np.abs(rx))),
        float(np.min(policy.Sigma_min)),
    )


# -- Monte Carlo under the reference measure -----------------------------------

BLOCK = 1024
MAX_CELLS = 50


@dataclass
class McReport:
    n_paths: int
    seed: int
    names: list[str]
    estimates: list[float]
    std_errors: list[float]
    targets: list[float]
    z_scores: list[float]

    def ok(self, zmax=4.0) -> bool:
        return all(abs(z) < zmax for z in self.z_scores)

    def to_dict(self) -> dict:
        return asdict(self)


def _cell_integrals(t, f, edges):
    seg = 0.5 * np.diff(t) * (f[:-1] + f[1:])
    return np.add.reduceat(seg, edges[:-1])


def mc_cross_check(policy, spec: ModelSpec, n_paths: int = 100_000, seed: int = 0) -> McReport:
    """Weighted moments of ``(zeta_T, zeta_T X_T, zeta_T X_T^2)`` against closed forms.

    Grid cells are merged into at most 50 coarse cells; within each, the
    log-increments of wealth and of the density are jointly Gaussian with
    moments given by integrals of the deterministic policy, so sampling
    is exact.  Paths come in blocks of 1024, each block seeded by
    ``(seed, block index)``, so path ``i`` does not depend on ``n_paths``.
    """
    if n_paths < 100:
        raise ValidationError("mc-paths: need at least 100 paths")
    t = np.asarray(policy.t)
    s = sample_at(spec, t)
    alpha, h = np.asarray(policy.alpha), np.asarray(policy.h)
    n_int = t.size - 1
    cells = min(MAX_CELLS, n_int)
    edges = np.unique(np.round(np.linspace(0, n_int, cells + 1)).astype(int))
    aa = np.sum(alpha * alpha, axis=1)
    drift = _cell_integrals(t, s.A + np.sum(s.B * alpha, axis=1) - 0.5 * aa, edges)
    vx = _cell_integrals(t, aa, edges)
    vz = _cell_integrals(t, np.sum(h * h, axis=1), edges)
    cov = _cell_integrals(t, np.sum(alpha * h, axis=1), edges)
    safe = np.where(vx > 0, vx, 1.0)
    sx = np.sqrt(vx)
    kz = np.where(vx > 0, cov / np.sqrt(safe), 0.0)
    rz = np.sqrt(np.maximum(vz - np.where(vx > 0, cov * cov / safe, 0.0), 0.0))
    log_x0 = math.log(spec.x0)
    count = 0
    mean = np.zeros(3)
    m2 = np.zeros(3)
    n_cells = len(vx)
    for b, start in enumerate(range(0, n_paths, BLOCK)):
        m = min(BLOCK, n_paths - start)
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(b,)))
        z = rng.standard_normal((m, n_cells, 2))
        u = sx * z[:, :, 0]
        w = kz * z[:, :, 0] + rz * z[:, :, 1]
        log_x = log_x0 + np.sum(drift + u, axis=1)
        log_z = np.sum(w - 0.5 * vz, axis=1)
        zeta = np.exp(log_z)
        samples = np.stack([zeta, np.exp(log_z + log_x), np.exp(log_z + 2 * log_x)])
        # pairwise (Chan) update keeps constant samples at exactly zero spread
        bm = samples.mean(axis=1)
        bm2 = np.sum((samples - bm[:, None]) ** 2, axis=1)
        delta = bm - mean
        total = count + m
        mean = mean + delta * (m / total)
        m2 = m2 + bm2 + delta * delta * (count * m / total)
        count = total
    var = m2 / (n_paths - 1)
    se = np.sqrt(var / n_paths)
    m1, v1 = terminal_stats(policy, spec)
    targets = np.array([1.0, m1, v1 + m1 * m1])
    diff = mean - targets
    z = np.empty(3)
    for i in range(3):
        scale = 1e-12 * max(1.0, abs(targets[i]))
        if se[i] > scale:
            z[i] = diff[i] / se[i]
        else:  # deterministic up to rounding
            z[i] = 0.0 if abs(diff[i]) <= scale else math.inf
    return McReport(
        n_paths, seed, ["E[zeta_T]", "E[zeta_T X_T]", "E[zeta_T X_T^2]"],
        mean.tolist(), se.tolist(), targets.tolist(), z.tolist(),
    )


# -- spike variations ----------------------------------------------------------


@dataclass
class SpikeReport:
    kind: str
    vector: list[float]
    eps: list[float]
    quotients: list[float]
    extrapolated: float
    predicted: float
    rel_err: float = field(default=math.nan)

    def to_dict(self) -> dict:
        return asdict(self)


class _Stages:
    """Policy and coefficients at every node and half-step of a time list."""

    def __init__(self, spec: ModelSpec, policy: Policy, times):
        times = np.asarray(times, dtype=float)
        pts = np.empty(2 * times.size - 1)
        pts[0::2] = times
        pts[1::2] = 0.5 * (times[:-1] + times[1:])
        s = sample_at(spec, pts)
        interp = lambda y: np.stack(  # noqa: E731
            [np.interp(pts, policy.t, y[:, j]) for j in range(y.shape[1])], axis=-1
        )
        self.times = times
        self.A, self.B, self.C, self.D, self.Q, self.R = s.A, s.B, s.C, s.D, s.Q, s.R
        self.alpha = interp(policy.alpha)
        self.h = interp(policy.h)


def _rk4_steps(rhs, y, times, offset, on):
    """RK4 through ``times``; stage ``j`` of the point list is ``offset + j``."""
    for k in range(times.size - 1):
        dt = times[k + 1] - times[k]
        i = offset + 2 * k
        k1 = rhs(i, y, on)
        k2 = rhs(i + 1, y + 0.5 * dt * k1, on)
        k3 = rhs(i + 1, y + 0.5 * dt * k2, on)
        k4 = rhs(i + 2, y + dt * k3, on)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y


def _spike_times(t_nodes, eps, n_sub):
    T = t_nodes[-1]
    if not 0.0 < eps < T:
        raise ValidationError(f"eps: need 0 < eps < T, got {eps:g}")
    head = np.linspace(0.0, eps, n_sub + 1)
    tail = t_nodes[t_nodes > eps * (1.0 + 1e-12)]
    return np.concatenate([head, tail]), n_sub


def _u_rhs(st: _Stages, mode: Mode, xi: float, vs):
    """Moments of (X*, X^eps) and the running cost, batched over ``vs``."""
    l = vs.shape[1]

    def rhs(i, y, on):
        m1, m2, S11, S12, S22, _ = y
        A, B, C, D, Q, R = st.A[i], st.B[i], st.C[i], st.D[i], st.Q[i], st.R[i]
        al, h = st.alpha[i], st.h[i]
        Da = D @ al
        sv = C + Da
        a_star = A + B @ al + sv @ h
        c0 = A + C @ h
        Bh = B + D.T @ h
        g = Bh @ al
        V = vs if on else np.zeros_like(vs)
        w = V @ Bh
        Dv = V @ D.T
        CDa = C @ Da
        dm1 = a_star * m1
        dm2 = c0 * m2 + g * m1 + w
        dS11 = (2 * a_star + sv @ sv) * S11
        dS12 = (c0 + a_star + sv @ C) * S12 + (g + sv @ Da) * S11 + (w + Dv @ sv) * m1
        dS22 = ((2 * c0 + C @ C) * S22 + (2 * g + 2 * CDa) * S12 + (Da @ Da) * S11
                + (2 * w + 2 * (Dv @ C)) * m2 + 2 * (Dv @ Da) * m1 + np.sum(Dv * Dv, axis=1))
        uu = (al @ al) * S11 + 2 * (V @ al) * m1 + np.sum(V * V, axis=1)
        if mode is Mode.STATE_DEP:
            pen = xi * (h @ h) * S22
        else:
            hh = h * h
            pen = xi * l * ((hh @ (al * al)) * S11 + 2 * (V @ (hh * al)) * m1 + (V * V) @ hh)
        dJ = 0.5 * (Q * S22 + R * uu - pen)
        return np.stack([dm1, dm2, dS11, dS12, dS22, dJ])

    return rhs


def _h_rhs(st: _Stages, mode: Mode, xi: float, etas):
    """Moments of X* under the measure with drift distortion h* + eta on [0, eps)."""
    l = etas.shape[1]

    def rhs(i, y, on):
        m, S, _ = y
        A, B, C, D, Q, R = st.A[i], st.B[i], st.C[i], st.D[i], st.Q[i], st.R[i]
        al, h = st.alpha[i], st.h[i]
        sv = C + D @ al
        a_star = A + B @ al + sv @ h
        H = h + etas if on else np.broadcast_to(h, etas.shape)
        shift = (H - h) @ sv
        dm = (a_star + shift) * m
        dS = (2 * a_star + 2 * shift + sv @ sv) * S
        if mode is Mode.STATE_DEP:
            pen = xi * np.sum(H * H, axis=1) * S
        else:
            pen = xi * l * ((H * H) @ (al * al)) * S
        dJ = 0.5 * (Q * S + R * (al @ al) * S - pen)
        return np.stack([dm, dS, dJ])

    return rhs


def spike_quotients(kind: str, vectors, eps: float, spec: ModelSpec, policy: Policy,
                    n_sub: int = 16) -> np.ndarray:
    """Difference quotients ``(J(perturbed) - J(equilibrium)) / eps`` at ``t = 0``.

    ``vectors`` has one perturbation per row.  The equilibrium objective is
    evaluated in the same batch with a zero perturbation, so a zero row
    gives exactly zero.
    """
    vecs = np.atleast_2d(np.asarray(vectors, dtype=float))
    if vecs.shape[1] != spec.d:
        raise ValidationError(f"perturbation must have {spec.d} components")
    batch = np.vstack([np.zeros((1, spec.d)), vecs])
    times, n_head = _spike_times(np.asarray(policy.t), eps, n_sub)
    st = _Stages(spec, policy, times)
    x0, nb = spec.x0, batch.shape[0]
    if kind == "u":
        rhs = _u_rhs(st, spec.mode, spec.xi, batch)
        y = np.zeros((6, nb))
        y[0:2] = x0
        y[2:5] = x0 * x0
        idx_mean, idx_sq = 1, 4
    elif kind == "h":
        rhs = _h_rhs(st, spec.mode, spec.xi, batch)
        y = np.zeros((3, nb))
        y[0], y[1] = x0, x0 * x0
        idx_mean, idx_sq = 0, 1
    else:
        raise ValidationError(f"spike: expected 'u' or 'h', got {kind!r}")
    y = _rk4_steps(rhs, y, times[: n_head + 1], 0, True)
    y = _rk4_steps(rhs, y, times[n_head:], 2 * n_head, False)
    mean, sq, run = y[idx_mean], y[idx_sq], y[-1]
    J = run + 0.5 * spec.G * sq - 0.5 * spec.nu * mean * mean - spec.mu1 * x0 * mean
    return (J[1:] - J[0]) / eps


def spike_quotient(kind, vector, eps, spec, policy, n_sub: int = 16) -> float:
    return float(spike_quotients(kind, [vector], eps, spec, policy, n_sub)[0])


def predicted_limit(kind: str, vector, spec: ModelSpec, policy: Policy) -> float:
    """Small-eps limit of the quotient implied by the second-order expansion."""
    v = np.asarray(vector, dtype=float)
    if kind == "u":
        return 0.5 * float(v @ policy.Sigma[0] @ v)
    if spec.mode is Mode.STATE_DEP:
        phi = spec.xi * np.ones(spec.d)
    else:
        phi = spec.xi * spec.d * policy.alpha[0] ** 2
    return -0.5 * spec.x0**2 * float(np.sum(phi * v * v))


def spike_report(kind, vector, spec, policy, eps_ladder=(1e-2, 1e-3, 1e-4), n_sub: int = 16) -> SpikeReport:
    """Quotient ladder, a linear extrapolation to ``eps -> 0`` and the predicted limit."""
    eps = sorted((float(e) for e in eps_ladder), reverse=True)
    if len(set(eps)) != len(eps):
        raise ValidationError("eps ladder must be strictly decreasing")
    q = [spike_quotient(kind, vector, e, spec, policy, n_sub) for e in eps]
    if len(q) >= 2:
        e1, e2 = eps[-2], eps[-1]
        extrap = q[-1] - (q[-2] - q[-1]) * e2 / (e1 - e2)
    else:
        extrap = q[-1]
    pred = predicted_limit(kind, vector, spec, policy)
    rel = abs(q[-1] - pred) / abs(pred) if pred != 0 else abs(q[-1])
    return SpikeReport(kind, list(map(float, np.atleast_1d(vector))), eps, q, extrap, pred, rel)
