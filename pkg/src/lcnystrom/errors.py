"""Exception types shared across the package."""


class LcnError(Exception):
    """Base class for package errors."""


class ConfigError(LcnError):
    """Bad configuration value or over-budget request."""


class DomainError(LcnError):
    """Input outside the operation's domain (e.g. point not on surface)."""


class OutsidePatchError(LcnError):
    """Local chart solve failed; the target lies outside the Lyapunov patch."""


class SupportAuditError(LcnError):
    """Partition-of-unity support audit failed at some surface point."""


class MomentAccuracyError(LcnError):
    """Singular moment quadrature could not reach the requested accuracy."""

    def __init__(self, message, achieved):
        super().__init__(message)
        self.achieved = achieved


class MomentSystemError(LcnError):
    """Local moment system is numerically singular at some point."""


class KernelRegularityError(LcnError):
    """Kernel limit extrapolation did not converge."""


class SolverError(LcnError):
    """Nodal linear system could not be solved reliably."""


class OracleError(LcnError):
    """Reference quadrature could not reach the requested tolerance."""


class InterpolationError(LcnError):
    """Continuous extension failed at an evaluation point."""
