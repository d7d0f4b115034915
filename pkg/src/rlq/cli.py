"""Command-line front end.

Exit codes: 0 success, 1 invalid input, 2 solver failure, 3 a verification
or certificate check did not pass.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import mv, output, verify
from .baseline import closed_loop_nonrobust, open_loop_nonrobust
from .errors import CertificateError, SolverError, ValidationError
from .model import Mode, TimeGrid, load_config

EXIT_OK, EXIT_INVALID, EXIT_SOLVER, EXIT_CHECK = 0, 1, 2, 3
THREADS_ENV = "RLQ_THREADS"
SPIKE_EPS = (1e-2, 1e-3, 1e-4)
SPIKE_TOL = 1e-6
SPIKE_REL = 0.01


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(f"arguments: {message}")


def parse_values(text: str) -> list[float]:
    """``a:b:step`` (both ends inclusive) or a comma-separated list."""
    try:
        if ":" in text:
            a, b, step = (float(p) for p in text.split(":"))
            if not step > 0 or b < a:
                raise ValidationError(f"values: need step > 0 and a <= b in {text!r}")
            n = math.floor((b - a) / step + 1e-9)
            vals = [a + k * step for k in range(n + 1)]
            if abs(a + (n + 1) * step - b) <= 1e-9 * max(1.0, abs(b)):
                vals.append(b)
            return vals
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise ValidationError(f"values: cannot parse {text!r}") from None


def read_values_file(path) -> list[float]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"values-file: cannot read {path} ({exc.strerror})") from None
    try:
        return [float(tok) for tok in text.replace(",", " ").split()]
    except ValueError:
        raise ValidationError(f"values-file: non-numeric entry in {path}") from None


def workers_from_env() -> int:
    raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(f"{THREADS_ENV}: expected an integer, got {raw!r}") from None
    if n < 0:
        raise ValidationError(f"{THREADS_ENV}: must be >= 0")
    return n


def _load(args):
    spec, grid = load_config(args.config)
    if getattr(args, "steps", None) is not None:
        if args.steps < 1:
            raise ValidationError("steps: expected a positive integer")
        grid = TimeGrid(grid.T, args.steps)
    return spec, grid


def _values(args) -> list[float]:
    if args.values is not None and args.values_file is not None:
        raise ValidationError("values: give --values or --values-file, not both")
    if args.values is not None:
        vals = parse_values(args.values)
    elif args.values_file is not None:
        vals = read_values_file(args.values_file)
    else:
        raise ValidationError("values: one of --values or --values-file is required")
    if not vals:
        raise ValidationError("values: empty list")
    return vals


def cmd_solve(args) -> int:
    spec, grid = _load(args)
    coeffs, policy = mv.solve(spec, grid)
    output.write_policy_csv(args.out, coeffs, policy)
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec, grid = _load(args)
    vals = _values(args)
    workers = workers_from_env()
    if args.vary == "mu1":
        pts = mv.sweep_risk(spec, grid, vals, workers)
    else:
        pts = mv.sweep_ambiguity(spec, grid, vals, workers)
    output.write_frontier_csv(args.out, pts, spec.d)
    return EXIT_OK


def cmd_relation(args) -> int:
    spec, grid = _load(args)
    if args.form == "linear" and args.a0 is None:
        raise ValidationError("a0: required for --form linear")
    vals = _values(args)
    pts = mv.relation_sweep(spec, grid, args.form, vals, args.a0 or 0.0, args.a1, workers_from_env())
    output.write_frontier_csv(args.out, pts, spec.d)
    return EXIT_OK


def cmd_baseline(args) -> int:
    spec, grid = _load(args)
    fn = open_loop_nonrobust if args.kind == "open" else closed_loop_nonrobust
    output.write_baseline_csv(args.out, fn(spec, grid))
    return EXIT_OK


def cmd_certify(args) -> int:
    spec, grid = _load(args)
    constants = None
    if args.constants is not None:
        try:
            constants = json.loads(Path(args.constants).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ValidationError(f"constants: cannot read {args.constants} ({exc.strerror})") from None
        except json.JSONDecodeError as exc:
            raise ValidationError(f"constants: invalid JSON ({exc})") from None
        if not isinstance(constants, dict):
            raise ValidationError("constants: expected a JSON object")
    if spec.mode is Mode.STATE_DEP:
        from .statedep import certify_state as certify
    else:
        from .ctrldep import certify_ctrl as certify
    cert = certify(spec, grid, constants)
    print(output.dumps(cert.to_dict(include_paths=args.paths)))
    return EXIT_OK if cert.verdict else EXIT_CHECK


def cmd_verify(args) -> int:
    spec, grid = _load(args)
    coeffs, policy = mv.solve(spec, grid)
    res = verify.residuals(coeffs, policy, spec)
    report = {"residuals": {**vars(res), "ok": res.ok()}}
    ok = res.ok()
    if args.mc_paths is not None:
        mc = verify.mc_cross_check(policy, spec, args.mc_paths, args.seed)
        report["monte_carlo"] = {**mc.to_dict(), "ok": mc.ok()}
        ok &= mc.ok()
    if args.spike is not None:
        vec = np.full(spec.d, args.mag)
        sp = verify.spike_report(args.spike, vec, spec, policy, SPIKE_EPS)
        q = sp.quotients[-1]
        if args.spike == "u":
            passed = q >= -SPIKE_TOL and sp.rel_err <= SPIKE_REL
        else:
            passed = q <= SPIKE_TOL
        report["spike"] = {**sp.to_dict(), "ok": bool(passed)}
        ok &= bool(passed)
    report["ok"] = bool(ok)
    print(output.dumps(report))
    return EXIT_OK if ok else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rlq", description="Robust time-inconsistent LQ equilibrium solver.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name, fn, help_):
        c = sub.add_parser(name, help=help_)
        c.add_argument("--config", required=True, help="model configuration JSON")
        c.add_argument("--steps", type=int, help="override the grid step count")
        c.set_defaults(func=fn)
        return c

    def swept(c):
        c.add_argument("--values", help="a:b:step (inclusive) or comma-separated list")
        c.add_argument("--values-file", help="whitespace-separated values")
        c.add_argument("--out", required=True)

    c = command("solve", cmd_solve, "solve the equilibrium and write the policy CSV")
    c.add_argument("--out", required=True)

    c = command("sweep", cmd_sweep, "frontier sweep over mu1 or xi")
    c.add_argument("--vary", required=True, choices=["mu1", "xi"])
    swept(c)

    c = command("relation", cmd_relation, "risk sweep with xi tied to mu1")
    c.add_argument("--form", required=True, choices=["linear", "quadratic"])
    c.add_argument("--a0", type=float)
    c.add_argument("--a1", type=float, required=True)
    swept(c)

    c = command("baseline", cmd_baseline, "non-robust reference investment rule")
    c.add_argument("--kind", required=True, choices=["open", "closed"])
    c.add_argument("--out", required=True)

    c = command("certify", cmd_certify, "well-posedness certificate as JSON")
    c.add_argument("--constants", help="JSON object overriding default constants")
    c.add_argument("--paths", action="store_true", help="include envelope paths")

    c = command("verify", cmd_verify, "residual, Monte Carlo and spike checks")
    c.add_argument("--mc-paths", type=int)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--spike", choices=["u", "h"])
    c.add_argument("--mag", type=float, default=1.0)
    return p


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except (ValidationError, CertificateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
