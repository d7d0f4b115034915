"""Open-loop equilibria for robust time-inconsistent LQ control."""

from .baseline import BaselineKind, BaselinePath, closed_loop_nonrobust, open_loop_nonrobust
from .certificate import Certificate, Margin
from .ctrldep import certify_ctrl, solve_ctrl
from .errors import (
    CertificateError,
    DegenerateError,
    IntegrationError,
    RLQError,
    SolverError,
    ValidationError,
)
from .model import Mode, ModelSpec, Schedule, TimeGrid, benchmark_spec, load_config, parse_config, validate
from .mv import (
    FrontierPoint,
    relation_sweep,
    solve,
    sweep_ambiguity,
    sweep_risk,
    terminal_stats,
)
from .paths import CoeffPath, Policy
from .statedep import certify_state, solve_state
from .verify import McReport, SpikeReport, mc_cross_check, residuals, spike_quotient, spike_report

__version__ = "0.1.0"
