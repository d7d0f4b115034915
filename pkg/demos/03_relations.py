"""
Tying ambiguity aversion to risk aversion
=========================================

If ambiguity aversion grows linearly with risk aversion the mean terminal
wealth settles down as mu1 grows.  Under a quadratic tie the state-dependent
coefficient system stops existing on [0, 1] once mu1 passes about 4: the
solver reports where the investment matrix loses positive definiteness
instead of stepping across the pole.
"""

from rlq import TimeGrid, benchmark_spec
from rlq.mv import relation_sweep

grid = TimeGrid(1.0, 2000)
spec = benchmark_spec()

print("linear, xi = 5 + 2 mu1")
for p in relation_sweep(spec, grid, "linear", [1e1, 1e2, 1e3, 1e4, 1e5, 1e6], a0=5.0, a1=2.0):
    print(f"  mu1 = {p.mu1:8.0e}  mean {p.mean:.8f}  std {p.std:.6f}")

print("quadratic, xi = 2 mu1^2")
for p in relation_sweep(spec, grid, "quadratic", [1.0, 2.0, 3.0, 4.0, 10.0, 100.0], a1=2.0):
    if p.status == "ok":
        print(f"  mu1 = {p.mu1:6g}  mean {p.mean:.8f}  std {p.std:.6f}")
    else:
        print(f"  mu1 = {p.mu1:6g}  {p.status}: {p.message}")
