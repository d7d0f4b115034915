"""Non-robust equilibrium investment rules used as reference curves."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import IntegrationError, SolverError
from .model import CoefficientCache, ModelSpec, TimeGrid, sample
from .odeint import rk4, tail_integral

__all__ = ["BaselineKind", "BaselinePath", "open_loop_nonrobust", "closed_loop_nonrobust"]


class BaselineKind(str, Enum):
    OPEN = "open"
    CLOSED = "closed"


@dataclass(frozen=True)
class BaselinePath:
    t: np.ndarray
    alpha: np.ndarray  # (n, d)
    kind: BaselineKind

    @property
    def h(self) -> np.ndarray:
        return np.zeros_like(self.alpha)


def open_loop_nonrobust(spec: ModelSpec, grid: TimeGrid) -> BaselinePath:
    """``mu1 e^{-int_t^T A} B_t / (1 + mu1 int_t^T e^{-int_s^T A} |B_s|^2 ds)``."""
    s = sample(spec, grid)
    disc = np.exp(-tail_integral(s.t, s.A))
    denom = 1.0 + spec.mu1 * tail_integral(s.t, disc * np.sum(s.B * s.B, axis=1))
    alpha = spec.mu1 * (disc / denom)[:, None] * s.B
    return BaselinePath(s.t, alpha, BaselineKind.OPEN)


def _closure(c, y, mu1):
    return c.B * (np.exp(-y[0]) - 1.0 + mu1 * np.exp(-y[1]))


def closed_loop_nonrobust(spec: ModelSpec, grid: TimeGrid) -> BaselinePath:
    """Feedback equilibrium via the running integrals of the recursive formula.

    With ``y1 = int_t^T |a|^2`` and ``y2 = int_t^T (A + B'a + |a|^2)`` the
    rule is ``a = B (e^{-y1} - 1 + mu1 e^{-y2})``; both integrals are
    carried as state and integrated backward from zero.
    """
    nodes = grid.nodes[::-1]
    cache = CoefficientCache(spec, nodes)
    mu1 = spec.mu1

    def rhs(t, y):
        c = cache(t)
        a = _closure(c, y, mu1)
        aa = a @ a
        return np.array([-aa, -(c.A + c.B @ a + aa)])

    try:
        Y = rk4(rhs, np.zeros(2), nodes)[::-1]
    except IntegrationError as exc:
        raise SolverError(f"closed-loop baseline: {exc}") from exc
    s = sample(spec, grid)
    alpha = np.stack([_closure(s.node(k), Y[k], mu1) for k in range(len(s.t))])
    return BaselinePath(s.t, alpha, BaselineKind.CLOSED)
