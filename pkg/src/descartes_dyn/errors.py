"""Exception hierarchy shared across the package."""


class DescartesDynError(Exception):
    """Base class for all package-specific errors."""


class EvaluationError(DescartesDynError, ValueError):
    """A field evaluation produced a non-finite value."""


class DegenerateMetricError(DescartesDynError, ValueError):
    """Metric determinant is non-positive at the evaluation point."""


class DegenerateConstraintError(DescartesDynError, ValueError):
    """Constraint covector vanishes at the evaluation point."""


class DegenerateFieldError(DescartesDynError, ValueError):
    """A constructed vector field degenerates (zero direction) at the point."""


class ChartBoundaryError(DescartesDynError, ValueError):
    """Euler-angle chart breaks down (sin z = 0 or within margin of it)."""


class DomainBoundaryError(DescartesDynError, ValueError):
    """A radicand went negative / a quadrature hit a turning point."""


class TangencyError(DescartesDynError, ValueError):
    """A velocity that must lie in the constraint plane does not."""


class ConfigError(DescartesDynError, ValueError):
    """Scenario configuration is syntactically or semantically invalid."""


class IntegrationError(DescartesDynError, RuntimeError):
    """Numerical integration failed (step underflow, non-finite state)."""
