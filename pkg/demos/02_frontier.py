"""
Mean-standard deviation frontiers
=================================

Sweep risk aversion at fixed ambiguity aversion and vice versa.  With
state-dependent ambiguity both ends of the risk sweep hold only the
risk-free asset, so the frontier closes into a loop.  The control-dependent
system at xi = 10 only exists on [0, 1] up to mu1 of about 5; larger values
are written as failed rows.  The CSV files feed ``frontier.gp``.
"""

import math
import os

import numpy as np

from rlq import Mode, TimeGrid, benchmark_spec
from rlq.mv import sweep_ambiguity, sweep_risk
from rlq.output import write_frontier_csv

grid = TimeGrid(1.0, 1000)
workers = int(os.environ.get("RLQ_THREADS", "0"))
out = os.environ.get("DEMO_OUT", ".")

risk = [0.0] + list(np.geomspace(0.05, 1e6, 40))
for mode in (Mode.STATE_DEP, Mode.CTRL_DEP):
    pts = sweep_risk(benchmark_spec(mode=mode, xi=10.0), grid, risk, workers)
    write_frontier_csv(os.path.join(out, f"frontier_mu1_{mode.value}.csv"), pts, 1)
    ok = [p for p in pts if p.status == "ok"]
    top = max(ok, key=lambda p: p.mean)
    print(f"{mode.value}: {len(ok)}/{len(pts)} rows solved; highest mean {top.mean:.5f} at mu1 = {top.mu1:.3g}")
    if mode is Mode.STATE_DEP:
        print(f"   ends: ({ok[0].mean:.6f}, {ok[0].std:.1e}) and ({ok[-1].mean:.6f}, {ok[-1].std:.1e});"
              f" riskless e^0.02 = {math.exp(0.02):.6f}")

# More ambiguity aversion pushes the investor towards the non-robust rule.
pts = sweep_ambiguity(benchmark_spec(mu1=2.0), grid, np.geomspace(1.0, 1e6, 25), workers)
write_frontier_csv(os.path.join(out, "frontier_xi_state_dep.csv"), pts, 1)
for p in pts[::6]:
    print(f"xi = {p.xi:10.3g}: mean {p.mean:.5f}, std {p.std:.5f}, alpha_0 {p.alpha0[0]:.5f}")
