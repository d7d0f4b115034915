"""Well-posedness certificates: envelope bounds on the coefficient system.

A certificate evaluates solution-independent upper and lower envelopes of
the coefficient ODEs and checks that they stay inside the truncation box
the constants describe.  When every margin is non-negative the coefficient
system has a unique solution inside that box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["Margin", "Certificate", "VERDICT_TOL", "margin_ge", "margin_le", "merge_constants"]

VERDICT_TOL = 1e-12


@dataclass(frozen=True)
class Margin:
    """Most binding node of one inequality; ``slack < 0`` means violated."""

    name: str
    slack: float
    node: int | None = None
    t: float | None = None
    strict: bool = False

    @property
    def ok(self) -> bool:
        if not math.isfinite(self.slack):
            return self.slack == math.inf
        return self.slack > 0.0 if self.strict else self.slack >= -VERDICT_TOL


def _margin(name, t, slack, strict=False) -> Margin:
    slack = np.asarray(slack, dtype=float)
    if slack.size == 0:
        return Margin(name, math.inf)
    if np.any(np.isnan(slack)):
        k = int(np.flatnonzero(np.isnan(slack))[0])
        return Margin(name, -math.inf, k, float(t[k]), strict)
    k = int(np.argmin(slack))
    return Margin(name, float(slack[k]), k, float(t[k]), strict)


def margin_ge(name, t, lhs, rhs, strict=False) -> Margin:
    """Margin of ``lhs >= rhs`` (or ``>`` when strict) over the nodes."""
    return _margin(name, t, np.broadcast_to(np.asarray(lhs) - rhs, np.shape(t)), strict)


def margin_le(name, t, lhs, rhs) -> Margin:
    """Margin of ``lhs <= rhs`` over the nodes."""
    return _margin(name, t, np.broadcast_to(rhs - np.asarray(lhs), np.shape(t)))


def merge_constants(defaults: dict, given: dict | None, optional=()) -> dict:
    """Overlay user constants on the defaults; unknown or non-numeric entries are errors."""
    from .errors import CertificateError

    out = dict(defaults)
    for key, value in (given or {}).items():
        if key not in defaults and key not in optional:
            raise CertificateError(f"{key}: unknown certificate constant")
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise CertificateError(f"{key}: expected a finite number")
        out[key] = float(value)
    return out


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, list):
        return [_jsonable(v) for v in x]
    if isinstance(x, float) and not math.isfinite(x):
        return None if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return x


@dataclass
class Certificate:
    mode: str
    constants: dict
    margins: list[Margin]
    t: np.ndarray
    envelopes: dict = field(default_factory=dict)
    bounds: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def verdict(self) -> bool:
        return all(m.ok for m in self.margins)

    @property
    def failed(self) -> list[Margin]:
        return [m for m in self.margins if not m.ok]

    def margin(self, name: str) -> Margin:
        for m in self.margins:
            if m.name == name:
                return m
        raise KeyError(name)

    def to_dict(self, include_paths: bool = False) -> dict:
        out = {
            "mode": self.mode,
            "verdict": self.verdict,
            "constants": {k: _jsonable(float(v)) for k, v in self.constants.items()},
            "margins": [
                {
                    "name": m.name,
                    "slack": _jsonable(m.slack),
                    "node": m.node,
                    "t": m.t,
                    "ok": m.ok,
                }
                for m in self.margins
            ],
            "failed": [m.name for m in self.failed],
            "notes": list(self.notes),
        }
        if include_paths:
            out["t"] = _jsonable(self.t)
            out["envelopes"] = {k: _jsonable(v) for k, v in self.envelopes.items()}
            out["bounds"] = {k: _jsonable(v) for k, v in self.bounds.items()}
        return out
