"""Fixed-step Runge-Kutta integration of terminal-value problems."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import IntegrationError
from .model import TimeGrid

__all__ = ["BackwardProblem", "rk4", "integrate_backward", "linear_backward", "tail_integral"]

_STAGES = ("k1", "k2", "k3", "k4")


def rk4(rhs: Callable, y_start, times) -> np.ndarray:
    """Classical RK4 through ``times`` (ascending or descending).

    Returns an array with one row per entry of ``times``; row 0 is
    ``y_start`` unchanged.  ``y`` may have any shape.
    """
    times = np.asarray(times, dtype=float)
    y = np.array(y_start, dtype=float)
    out = np.empty((times.size,) + y.shape)
    out[0] = y

    def check(val, k, stage, t):
        if not np.all(np.isfinite(val)):
            raise IntegrationError(
                f"non-finite right-hand side in integration step {k}, stage {stage}", t=t, node=k, stage=stage
            )
        return val

    # overflow surfaces as a non-finite stage and is reported by ``check``
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(times.size - 1):
            t0, t1 = times[k], times[k + 1]
            h = t1 - t0
            tm = 0.5 * (t0 + t1)
            k1 = check(rhs(t0, y), k, _STAGES[0], t0)
            k2 = check(rhs(tm, y + 0.5 * h * k1), k, _STAGES[1], tm)
            k3 = check(rhs(tm, y + 0.5 * h * k2), k, _STAGES[2], tm)
            k4 = check(rhs(t1, y + h * k3), k, _STAGES[3], t1)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            out[k + 1] = y
    return out


@dataclass(frozen=True)
class BackwardProblem:
    rhs: Callable
    terminal: np.ndarray
    grid: TimeGrid

    @property
    def m(self) -> int:
        return int(np.size(self.terminal))


def integrate_backward(problem: BackwardProblem) -> np.ndarray:
    """Integrate from ``T`` down to 0; rows are returned for ``t_0 .. t_steps``.

    The terminal value is reproduced exactly in the last row.  Node
    indices in an :class:`IntegrationError` count grid steps from ``T``.
    """
    nodes = problem.grid.nodes
    path = rk4(problem.rhs, problem.terminal, nodes[::-1])
    return path[::-1].copy()


def tail_integral(t, f) -> np.ndarray:
    """``K[k] = int_{t_k}^{t_last} f`` by composite trapezoid."""
    t = np.asarray(t, dtype=float)
    f = np.asarray(f, dtype=float)
    seg = 0.5 * np.diff(t) * (f[:-1] + f[1:])
    K = np.zeros_like(f)
    K[:-1] = np.cumsum(seg[::-1])[::-1]
    return K


def linear_backward(t, c1, c0, z_T) -> np.ndarray:
    """Closed-form solution of ``z' = -c1 z - c0`` with ``z(T) = z_T``.

    Evaluates ``z(t) = z_T exp(int_t^T c1) + int_t^T exp(int_t^u c1) c0(u) du``
    with both integrals by composite trapezoid on the nodes ``t``.
    """
    t = np.asarray(t, dtype=float)
    c1 = np.broadcast_to(np.asarray(c1, dtype=float), t.shape)
    c0 = np.broadcast_to(np.asarray(c0, dtype=float), t.shape)
    K = tail_integral(t, c1)
    n = t.size
    growth = np.exp(K[:-1] - K[1:])
    half = 0.5 * np.diff(t)
    z = np.empty(n)
    I = 0.0
    z[-1] = z_T
    for k in range(n - 2, -1, -1):
        I = growth[k] * I + half[k] * (c0[k] + growth[k] * c0[k + 1])
        z[k] = z_T * np.exp(K[k]) + I
    return z
