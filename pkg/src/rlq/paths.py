"""Solved coefficient paths, equilibrium policies and the second-order term."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .odeint import linear_backward

__all__ = ["CoeffPath", "Policy", "p_second_order", "NAMES"]

NAMES = ("L", "H", "F", "M", "N", "Gamma")


@dataclass(frozen=True)
class CoeffPath:
    """Values of (L, H, F, M, N, Gamma) at every grid node, ascending in t."""

    t: np.ndarray
    values: np.ndarray  # (n, 6)

    @classmethod
    def terminal(cls, G, nu, mu1) -> np.ndarray:
        return np.array([G / 2.0, nu, mu1, G, nu, mu1])

    def __getattr__(self, name):
        if name in NAMES:
            return self.values[:, NAMES.index(name)]
        raise AttributeError(name)

    @property
    def Delta(self) -> np.ndarray:
        return self.M - self.N - self.Gamma

    @property
    def E(self) -> np.ndarray:
        return 2.0 * self.L - self.H - self.F


@dataclass
class Policy:
    """Equilibrium investment rule and drift distortion per grid node.

    ``alpha`` and ``h`` have shape ``(n, d)``.  ``Sigma`` holds the
    second-order matrix at each node (``(n, d, d)``); ``Sigma_min`` its
    smallest eigenvalue.  ``meta`` carries solver diagnostics.
    """

    t: np.ndarray
    alpha: np.ndarray
    h: np.ndarray
    P: np.ndarray
    Sigma: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def Sigma_min(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.Sigma)[:, 0]

    @property
    def d(self) -> int:
        return self.alpha.shape[1]


def p_second_order(t, A, C, h, Q, G_tilde, xi_state=0.0) -> np.ndarray:
    """Second-order adjoint on the diagonal, ``P(t;t)``, at every node.

    ``A`` and ``Q`` are ``(n,)``, ``C`` and ``h`` are ``(n, d)``.  Solves
    ``P(t) = G~ exp(int_t^T k) + int_t^T exp(int_t^v k)(Q - xi |h|^2) dv``
    with ``k = 2A + 2 C'h + |C|^2`` by composite trapezoid.
    """
    C = np.asarray(C, dtype=float)
    h = np.asarray(h, dtype=float)
    k = 2.0 * np.asarray(A) + 2.0 * np.sum(C * h, axis=1) + np.sum(C * C, axis=1)
    src = np.asarray(Q) - xi_state * np.sum(h * h, axis=1)
    return linear_backward(t, k, src, G_tilde)
