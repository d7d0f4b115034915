"""Exception hierarchy shared by the solvers and the command line."""


class RLQError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(RLQError, ValueError):
    """A model specification or configuration file is not admissible."""

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class SolverError(RLQError):
    """Numerical failure while building an equilibrium.

    ``t`` is the time at which the failure was detected, when known.
    """

    def __init__(self, message, t=None):
        if t is not None:
            message = f"{message} (t={t:.17g})"
        super().__init__(message)
        self.t = t


class IntegrationError(SolverError):
    """Non-finite right-hand side during Runge-Kutta integration."""

    def __init__(self, message, t=None, node=None, stage=None):
        super().__init__(message, t)
        self.node = node
        self.stage = stage


class DegenerateError(SolverError):
    """The requested equilibrium is degenerate and is not solved numerically.

    ``equilibrium`` carries the analytic pair, when one is known.
    """

    def __init__(self, message, equilibrium=None):
        super().__init__(message)
        self.equilibrium = equilibrium or {}


class CertificateError(RLQError, ValueError):
    """Certificate constants violate their preconditions."""
