"""Model specifications, coefficient schedules and the time grid.

A :class:`ModelSpec` describes the one-dimensional controlled state

    dX = (A X + B'u) ds + (C X + D u)' dW

together with the quadratic objective weights (Q, R, G, nu), the
state-dependent reward coefficient ``mu1`` and the ambiguity aversion
``xi``.  Deterministic coefficients are :class:`Schedule` objects:
constants or piecewise-linear tables over ``[0, T]``.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .errors import ValidationError

__all__ = [
    "Mode",
    "Schedule",
    "ModelSpec",
    "TimeGrid",
    "NodeCoeffs",
    "Sampled",
    "Violation",
    "CoefficientCache",
    "validate",
    "sample",
    "sample_at",
    "load_config",
    "parse_config",
    "benchmark_spec",
]

_KNOT_TOL = 1e-12


class Mode(str, Enum):
    STATE_DEP = "state_dep"
    CTRL_DEP = "ctrl_dep"


@dataclass(frozen=True)
class Schedule:
    """Deterministic coefficient: a constant or a linear interpolation table.

    A constant has empty ``times`` and a single entry in ``values``.
    """

    times: tuple[float, ...] = ()
    values: tuple[float, ...] = (0.0,)

    def __post_init__(self):
        times = tuple(float(x) for x in self.times)
        values = tuple(float(x) for x in self.values)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if not times:
            if len(values) != 1:
                raise ValueError("a constant schedule holds exactly one value")
            return
        if len(times) != len(values):
            raise ValueError("schedule table needs one value per knot")
        if len(times) < 2:
            raise ValueError("schedule table needs at least two knots")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("schedule knot times must be strictly increasing")

    @classmethod
    def constant(cls, value: float) -> "Schedule":
        return cls((), (value,))

    @classmethod
    def table(cls, knots: Sequence[Sequence[float]]) -> "Schedule":
        knots = list(knots)
        return cls(tuple(k[0] for k in knots), tuple(k[1] for k in knots))

    @classmethod
    def coerce(cls, value) -> "Schedule":
        if isinstance(value, Schedule):
            return value
        return cls.constant(float(value))

    @property
    def is_constant(self) -> bool:
        return not self.times

    def is_zero(self) -> bool:
        return all(v == 0.0 for v in self.values)

    def __call__(self, t):
        if self.is_constant:
            if np.ndim(t) == 0:
                return self.values[0]
            return np.full(np.shape(t), self.values[0])
        t_arr = np.asarray(t, dtype=float)
        lo, hi = self.times[0], self.times[-1]
        tol = _KNOT_TOL * max(1.0, abs(hi))
        if np.any(t_arr < lo - tol) or np.any(t_arr > hi + tol):
            raise ValueError(f"schedule evaluated outside [{lo}, {hi}]")
        out = np.interp(t_arr, self.times, self.values)
        return float(out) if out.ndim == 0 else out

    def to_json(self):
        if self.is_constant:
            return self.values[0]
        return {"table": [[t, v] for t, v in zip(self.times, self.values)]}


@dataclass(frozen=True)
class NodeCoeffs:
    """Coefficients evaluated at a single time."""

    A: float
    B: np.ndarray  # (d,)
    C: np.ndarray  # (d,)
    D: np.ndarray  # (d, d), row j loads driver j
    Q: float
    R: float


def _coerce_vector(value, d=None):
    if isinstance(value, (Schedule, int, float)):
        n = 1 if d is None else d
        return tuple(Schedule.coerce(value) for _ in range(n))
    return tuple(Schedule.coerce(v) for v in value)


@dataclass(frozen=True)
class ModelSpec:
    """All model and preference coefficients for one equilibrium problem.

    ``D`` is a single Schedule (scalar times identity), a tuple of ``d``
    Schedules (diagonal loading) or a ``d x d`` nested tuple (full matrix,
    row ``j`` multiplying driver ``j``).  ``xi`` is the state-dependent
    aversion in ``STATE_DEP`` mode and the control-dependent one in
    ``CTRL_DEP`` mode.
    """

    mode: Mode
    T: float
    x0: float
    A: Schedule
    B: tuple[Schedule, ...]
    G: float
    nu: float
    mu1: float
    xi: float
    C: tuple[Schedule, ...] | None = None
    D: Any = 1.0
    Q: Schedule = field(default_factory=lambda: Schedule.constant(0.0))
    R: Schedule = field(default_factory=lambda: Schedule.constant(0.0))

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        set_("mode", Mode(self.mode))
        for name in ("T", "x0", "G", "nu", "mu1", "xi"):
            set_(name, float(getattr(self, name)))
        set_("A", Schedule.coerce(self.A))
        set_("Q", Schedule.coerce(self.Q))
        set_("R", Schedule.coerce(self.R))
        B = _coerce_vector(self.B)
        set_("B", B)
        C = _coerce_vector(0.0 if self.C is None else self.C, len(B))
        set_("C", C)
        D = self.D
        if isinstance(D, (Schedule, int, float)):
            D = Schedule.coerce(D)
        elif all(isinstance(r, (Schedule, int, float)) for r in D):
            D = tuple(Schedule.coerce(x) for x in D)
        else:
            D = tuple(tuple(Schedule.coerce(x) for x in row) for row in D)
        set_("D", D)

    @property
    def d(self) -> int:
        return len(self.B)

    @property
    def D_kind(self) -> str:
        if isinstance(self.D, Schedule):
            return "scalar"
        if all(isinstance(x, Schedule) for x in self.D):
            return "diag"
        return "full"

    def schedules(self):
        """Yield ``(name, schedule)`` for every coefficient schedule."""
        yield "A", self.A
        for j, s in enumerate(self.B):
            yield f"B[{j}]", s
        for j, s in enumerate(self.C):
            yield f"C[{j}]", s
        kind = self.D_kind
        if kind == "scalar":
            yield "D", self.D
        elif kind == "diag":
            for j, s in enumerate(self.D):
                yield f"D[{j}]", s
        else:
            for i, row in enumerate(self.D):
                for j, s in enumerate(row):
                    yield f"D[{i}][{j}]", s
        yield "Q", self.Q
        yield "R", self.R

    def _check_time(self, t):
        tol = _KNOT_TOL * max(1.0, self.T)
        if np.any(np.asarray(t) < -tol) or np.any(np.asarray(t) > self.T + tol):
            raise ValueError(f"coefficients requested outside [0, {self.T}]")

    def D_matrix(self, t: float) -> np.ndarray:
        d = self.d
        kind = self.D_kind
        if kind == "scalar":
            return self.D(t) * np.eye(d)
        if kind == "diag":
            return np.diag([s(t) for s in self.D])
        return np.array([[s(t) for s in row] for row in self.D], dtype=float)

    def at(self, t: float) -> NodeCoeffs:
        self._check_time(t)
        return NodeCoeffs(
            A=self.A(t),
            B=np.array([s(t) for s in self.B]),
            C=np.array([s(t) for s in self.C]),
            D=self.D_matrix(t),
            Q=self.Q(t),
            R=self.R(t),
        )

    def with_(self, **changes) -> "ModelSpec":
        return dataclasses.replace(self, **changes)

    def to_json(self) -> dict:
        kind = self.D_kind
        if kind == "scalar":
            D = self.D.to_json()
        elif kind == "diag":
            D = [s.to_json() for s in self.D]
        else:
            D = [[s.to_json() for s in row] for row in self.D]
        return {
            "mode": self.mode.value,
            "T": self.T,
            "d": self.d,
            "x0": self.x0,
            "G": self.G,
            "nu": self.nu,
            "mu1": self.mu1,
            "xi": self.xi,
            "A": self.A.to_json(),
            "B": [s.to_json() for s in self.B],
            "C": [s.to_json() for s in self.C],
            "D": D,
            "Q": self.Q.to_json(),
            "R": self.R.to_json(),
        }


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid with nodes ``t_k = k T / steps``."""

    T: float
    steps: int = 2000

    def __post_init__(self):
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ValueError("grid horizon must be positive and finite")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValueError("grid steps must be a positive integer")
        object.__setattr__(self, "steps", int(self.steps))

    @property
    def dt(self) -> float:
        return self.T / self.steps

    @property
    def nodes(self) -> np.ndarray:
        t = np.arange(self.steps + 1) * self.T / self.steps
        t[-1] = self.T
        return t

    def refine(self, factor: int = 2) -> "TimeGrid":
        return TimeGrid(self.T, self.steps * factor)


@dataclass(frozen=True)
class Violation:
    field: str
    message: str
    t: float | None = None

    def __str__(self):
        where = "" if self.t is None else f" at t={self.t:g}"
        return f"{self.field}: {self.message}{where}"


def validate(spec: ModelSpec) -> list[Violation]:
    """Return every violated admissibility condition (empty if admissible).

    Sign conditions on Q and R are checked at schedule knots, which for
    piecewise-linear schedules is equivalent to checking every time.
    """
    out: list[Violation] = []
    if not (spec.T > 0 and math.isfinite(spec.T)):
        out.append(Violation("T", "horizon must be positive and finite"))
    if not spec.x0 > 0:
        out.append(Violation("x0", "initial wealth must be positive"))
    for name in ("G", "nu", "mu1"):
        v = getattr(spec, name)
        if not (v >= 0 and math.isfinite(v)):
            out.append(Violation(name, "must be finite and non-negative"))
    if not (spec.xi > 0 and math.isfinite(spec.xi)):
        out.append(Violation("xi", "ambiguity aversion must be positive and finite"))
    d = spec.d
    if d < 1:
        out.append(Violation("B", "need at least one driver"))
    if len(spec.C) != d:
        out.append(Violation("C", f"expected {d} entries, got {len(spec.C)}"))
    kind = spec.D_kind
    if kind == "diag" and len(spec.D) != d:
        out.append(Violation("D", f"expected {d} diagonal entries"))
    if kind == "full" and (len(spec.D) != d or any(len(r) != d for r in spec.D)):
        out.append(Violation("D", f"expected a {d}x{d} matrix"))

    tol = _KNOT_TOL * max(1.0, abs(spec.T))
    for name, s in spec.schedules():
        if not all(math.isfinite(v) for v in s.values):
            out.append(Violation(name, "values must be finite"))
        if not s.is_constant:
            if abs(s.times[0]) > tol or abs(s.times[-1] - spec.T) > tol:
                out.append(Violation(name, f"table must span [0, T={spec.T:g}]"))
    for name, s in (("Q", spec.Q), ("R", spec.R)):
        for t, v in zip(s.times or (None,), s.values):
            if v < 0:
                out.append(Violation(name, "must be non-negative", t))
                break

    c_nonzero = [(j, s) for j, s in enumerate(spec.C) if not s.is_zero()]
    if spec.mode is Mode.STATE_DEP:
        if c_nonzero and spec.G < spec.nu:
            out.append(Violation("G", "G >= nu required when C is not identically 0"))
    else:
        for j, s in c_nonzero:
            t = next((t for t, v in zip(s.times or (None,), s.values) if v != 0.0), None)
            out.append(Violation(f"C[{j}]", "C must be 0 in ctrl_dep mode", t))
        if kind != "scalar":
            out.append(Violation("D", "ctrl_dep mode needs a scalar D (times identity)"))
    return out


@dataclass(frozen=True)
class Sampled:
    """Coefficients sampled on a set of times (leading axis)."""

    t: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    Q: np.ndarray
    R: np.ndarray

    def node(self, k: int) -> NodeCoeffs:
        return NodeCoeffs(
            A=float(self.A[k]), B=self.B[k], C=self.C[k], D=self.D[k],
            Q=float(self.Q[k]), R=float(self.R[k]),
        )


def sample_at(spec: ModelSpec, times) -> Sampled:
    times = np.asarray(times, dtype=float)
    spec._check_time(times)
    n, d = times.size, spec.d
    col = lambda s: np.broadcast_to(s(times), (n,)).astype(float)  # noqa: E731
    kind = spec.D_kind
    if kind == "scalar":
        D = col(spec.D)[:, None, None] * np.eye(d)
    elif kind == "diag":
        D = np.zeros((n, d, d))
        for j, s in enumerate(spec.D):
            D[:, j, j] = col(s)
    else:
        D = np.stack([np.stack([col(s) for s in row], axis=-1) for row in spec.D], axis=1)
    return Sampled(
        t=times,
        A=col(spec.A),
        B=np.stack([col(s) for s in spec.B], axis=-1),
        C=np.stack([col(s) for s in spec.C], axis=-1),
        D=D,
        Q=col(spec.Q),
        R=col(spec.R),
    )


def sample(spec: ModelSpec, grid: TimeGrid) -> Sampled:
    """Evaluate every coefficient at the grid nodes."""
    return sample_at(spec, grid.nodes)


class CoefficientCache:
    """Node and half-step coefficients for a Runge-Kutta sweep over ``times``.

    Lookup is by exact float key; the keys are built with the same
    midpoint formula the integrator uses.  Unknown times fall back to
    direct evaluation.
    """

    def __init__(self, spec: ModelSpec, times):
        times = np.asarray(times, dtype=float)
        mids = 0.5 * (times[:-1] + times[1:])
        allt = np.concatenate([times, mids])
        s = sample_at(spec, allt)
        self.spec = spec
        self._table = {float(t): s.node(k) for k, t in enumerate(allt)}

    def __call__(self, t: float) -> NodeCoeffs:
        c = self._table.get(t)
        return c if c is not None else self.spec.at(t)


# -- configuration files -------------------------------------------------------

_REQUIRED = ("mode", "T", "x0", "G", "nu", "mu1", "xi", "A", "B")


def _parse_schedule(name, value):
    if isinstance(value, bool):
        raise ValidationError(f"{name}: expected a number or a table")
    if isinstance(value, (int, float)):
        return Schedule.constant(value)
    if isinstance(value, dict) and set(value) == {"table"}:
        try:
            return Schedule.table(value["table"])
        except (TypeError, IndexError, ValueError) as exc:
            raise ValidationError(f"{name}: bad table ({exc})") from None
    raise ValidationError(f"{name}: expected a number or {{\"table\": [[t, v], ...]}}")


def _parse_vector(name, value, d):
    if isinstance(value, list):
        if len(value) != d:
            raise ValidationError(f"{name}: expected {d} entries, got {len(value)}")
        return tuple(_parse_schedule(f"{name}[{j}]", v) for j, v in enumerate(value))
    s = _parse_schedule(name, value)
    return tuple(s for _ in range(d))


def parse_config(cfg: dict) -> tuple[ModelSpec, TimeGrid]:
    """Build a spec and grid from a decoded configuration mapping."""
    if not isinstance(cfg, dict):
        raise ValidationError("config: top level must be a JSON object")
    missing = [k for k in _REQUIRED if k not in cfg]
    if missing:
        raise ValidationError(f"{missing[0]}: missing required key")
    unknown = set(cfg) - set(_REQUIRED) - {"steps", "d", "C", "D", "Q", "R"}
    if unknown:
        raise ValidationError(f"{sorted(unknown)[0]}: unknown key")
    try:
        mode = Mode(cfg["mode"])
    except ValueError:
        raise ValidationError("mode: expected 'state_dep' or 'ctrl_dep'") from None

    def number(key, default=None):
        v = cfg.get(key, default)
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ValidationError(f"{key}: expected a number")
        return float(v)

    B_raw = cfg["B"]
    d = cfg.get("d", len(B_raw) if isinstance(B_raw, list) else 1)
    if isinstance(d, bool) or not isinstance(d, int) or d < 1:
        raise ValidationError("d: expected a positive integer")
    steps = cfg.get("steps", 2000)
    if isinstance(steps, bool) or not isinstance(steps, int) or steps < 1:
        raise ValidationError("steps: expected a positive integer")

    D_raw = cfg.get("D", 1.0)
    if isinstance(D_raw, list) and D_raw and isinstance(D_raw[0], list):
        if len(D_raw) != d or any(len(r) != d for r in D_raw):
            raise ValidationError(f"D: expected a {d}x{d} matrix")
        D = tuple(
            tuple(_parse_schedule(f"D[{i}][{j}]", v) for j, v in enumerate(row))
            for i, row in enumerate(D_raw)
        )
    elif isinstance(D_raw, list):
        D = _parse_vector("D", D_raw, d)
    else:
        D = _parse_schedule("D", D_raw)

    T = number("T")
    spec = ModelSpec(
        mode=mode,
        T=T,
        x0=number("x0"),
        A=_parse_schedule("A", cfg["A"]),
        B=_parse_vector("B", B_raw, d),
        C=_parse_vector("C", cfg.get("C", 0.0), d),
        D=D,
        Q=_parse_schedule("Q", cfg.get("Q", 0.0)),
        R=_parse_schedule("R", cfg.get("R", 0.0)),
        G=number("G"),
        nu=number("nu"),
        mu1=number("mu1"),
        xi=number("xi"),
    )
    try:
        grid = TimeGrid(T, steps)
    except ValueError as exc:
        raise ValidationError(f"T: {exc}") from None
    return spec, grid


def load_config(path) -> tuple[ModelSpec, TimeGrid]:
    """Read a UTF-8 JSON configuration file."""
    path = Path(path)
    try:
        cfg = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ValidationError(f"config: cannot read {path} ({exc.strerror})") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config: invalid JSON ({exc})") from None
    return parse_config(cfg)


def benchmark_spec(mode=Mode.STATE_DEP, mu1=2.0, xi=10.0, **changes) -> ModelSpec:
    """Single risky asset market: A=0.02, B=0.375, x0=1, T=1, G=nu=D=1."""
    spec = ModelSpec(
        mode=mode, T=1.0, x0=1.0, A=0.02, B=0.375, G=1.0, nu=1.0,
        mu1=mu1, xi=xi, C=0.0, D=1.0, Q=0.0, R=0.0,
    )
    return spec.with_(**changes) if changes else spec
