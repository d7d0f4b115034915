"""Terminal wealth statistics and efficient-frontier sweeps."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError, SolverError, ValidationError
from .model import Mode, ModelSpec, TimeGrid

__all__ = [
    "FrontierPoint",
    "terminal_stats",
    "wealth_exponents",
    "solve",
    "sweep_risk",
    "sweep_ambiguity",
    "relation_sweep",
    "relation_xi",
]


@dataclass(frozen=True)
class FrontierPoint:
    swept: float
    mu1: float
    xi: float
    mean: float
    std: float
    alpha0: tuple[float, ...]
    status: str = "ok"
    message: str = ""


def _trapz(t, f):
    return float(np.sum(0.5 * np.diff(t) * (f[:-1] + f[1:])))


def wealth_exponents(path, spec: ModelSpec) -> tuple[float, float]:
    """``(int_0^T A + (B + h)'alpha, int_0^T |alpha|^2)`` by trapezoid."""
    t = np.asarray(path.t)
    A = np.broadcast_to(spec.A(t), t.shape)
    B = np.stack([np.broadcast_to(s(t), t.shape) for s in spec.B], axis=-1)
    alpha, h = np.asarray(path.alpha), np.asarray(path.h)
    drift = _trapz(t, A + np.sum((B + h) * alpha, axis=1))
    quad = _trapz(t, np.sum(alpha * alpha, axis=1))
    return drift, quad


def terminal_stats(path, spec: ModelSpec) -> tuple[float, float]:
    """Mean and variance of terminal wealth under the equilibrium measure.

    ``path`` needs ``t``, ``alpha`` and ``h`` per node (``h = 0`` for the
    non-robust baselines).  Overflowing exponentials give ``inf``.
    """
    drift, quad = wealth_exponents(path, spec)
    with np.errstate(over="ignore"):
        growth = spec.x0 * np.exp(drift)
        var = growth * growth * np.expm1(quad)
    return float(growth), float(var)


def solve(spec: ModelSpec, grid: TimeGrid):
    """Dispatch on ``spec.mode``."""
    if spec.mode is Mode.STATE_DEP:
        from .statedep import solve_state

        return solve_state(spec, grid)
    from .ctrldep import solve_ctrl

    return solve_ctrl(spec, grid)


def _row(args) -> FrontierPoint:
    spec, grid, swept = args
    nan = (math.nan,) * spec.d
    try:
        _, policy = solve(spec, grid)
    except DegenerateError as exc:
        return FrontierPoint(swept, spec.mu1, spec.xi, math.nan, math.nan, nan, "degenerate", str(exc))
    except (SolverError, ValidationError) as exc:
        return FrontierPoint(swept, spec.mu1, spec.xi, math.nan, math.nan, nan, "failed", str(exc))
    mean, var = terminal_stats(policy, spec)
    std = math.sqrt(max(var, 0.0))
    return FrontierPoint(swept, spec.mu1, spec.xi, mean, std, tuple(policy.alpha[0].tolist()))


def _run(jobs, workers: int) -> list[FrontierPoint]:
    if workers and workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_row, jobs))
    return [_row(j) for j in jobs]


def sweep_risk(spec: ModelSpec, grid: TimeGrid, mu1_values, workers: int = 0) -> list[FrontierPoint]:
    """One row per risk-aversion value, ambiguity aversion held at ``spec.xi``."""
    values = [float(v) for v in mu1_values]
    if any(v < 0 for v in values):
        raise ValidationError("mu1: sweep values must be non-negative")
    return _run([(spec.with_(mu1=v), grid, v) for v in values], workers)


def sweep_ambiguity(spec: ModelSpec, grid: TimeGrid, xi_values, workers: int = 0) -> list[FrontierPoint]:
    """One row per ambiguity-aversion value, risk aversion held at ``spec.mu1``."""
    values = [float(v) for v in xi_values]
    if any(not v > 0 for v in values):
        raise ValidationError("xi: sweep values must be positive")
    return _run([(spec.with_(xi=v), grid, v) for v in values], workers)


def relation_xi(form: str, mu1: float, a0: float = 0.0, a1: float = 1.0) -> float:
    if form == "linear":
        return a0 + a1 * mu1
    if form == "quadratic":
        return a1 * mu1 * mu1
    raise ValidationError(f"form: expected 'linear' or 'quadratic', got {form!r}")


def relation_sweep(spec: ModelSpec, grid: TimeGrid, form: str, mu1_values,
                   a0: float = 0.0, a1: float = 1.0, workers: int = 0) -> list[FrontierPoint]:
    """Risk sweep with ambiguity aversion tied to risk aversion."""
    jobs = []
    for v in map(float, mu1_values):
        xi = relation_xi(form, v, a0, a1)
        if not xi > 0:
            raise ValidationError(f"xi: relation gives xi = {xi:g} <= 0 at mu1 = {v:g}")
        jobs.append((spec.with_(mu1=v, xi=xi), grid, v))
    return _run(jobs, workers)
