"""CSV and JSON serialisation of solver results."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

__all__ = [
    "fmt",
    "policy_header",
    "policy_rows",
    "write_policy_csv",
    "write_baseline_csv",
    "write_frontier_csv",
    "read_csv",
    "dumps",
]


def fmt(x) -> str:
    """17 significant digits: round-trips every double."""
    return format(float(x) + 0.0, ".17g")


def _cols(prefix, d):
    return [f"{prefix}_{j + 1}" for j in range(d)]


def policy_header(d: int) -> list[str]:
    return (["t"] + _cols("alpha", d) + _cols("h", d)
            + ["L", "H", "F", "M", "N", "Gamma", "Delta", "E", "P_tt", "Sigma_min"])


def policy_rows(coeffs, policy):
    extra = np.column_stack([coeffs.values, coeffs.Delta, coeffs.E, policy.P, policy.Sigma_min])
    table = np.column_stack([policy.t, policy.alpha, policy.h, extra])
    for row in table:
        yield [fmt(v) for v in row]


def _write(path, header, rows):
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_policy_csv(path, coeffs, policy) -> None:
    _write(path, policy_header(policy.d), policy_rows(coeffs, policy))


def write_baseline_csv(path, baseline) -> None:
    d = baseline.alpha.shape[1]
    rows = ([fmt(t)] + [fmt(a) for a in row] for t, row in zip(baseline.t, baseline.alpha))
    _write(path, ["t"] + _cols("alpha", d), rows)


def write_frontier_csv(path, points, d: int) -> None:
    header = ["swept", "mu1", "xi", "mean", "std"] + _cols("alpha0", d) + ["status"]
    rows = (
        [fmt(p.swept), fmt(p.mu1), fmt(p.xi), fmt(p.mean), fmt(p.std)]
        + [fmt(a) for a in p.alpha0] + [p.status]
        for p in points
    )
    _write(path, header, rows)


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(Path(path), newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def _clean(x):
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return None if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return x


def dumps(obj) -> str:
    """Strict JSON: non-finite floats become ``null``, ``"inf"`` or ``"-inf"``."""
    return json.dumps(_clean(obj), indent=2, allow_nan=False)
