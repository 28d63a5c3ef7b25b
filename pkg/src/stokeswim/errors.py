"""Exception types shared across the package."""


class StokeswimError(Exception):
    """Base class for package errors."""


class DomainError(StokeswimError):
    """Evaluation point or index outside the operation's domain."""


class PrecisionError(StokeswimError):
    """Quadrature order insufficient for the requested computation."""


class IncompatibleDataError(StokeswimError):
    """Boundary data with net flux: no decaying exterior solution exists."""


class ProjectionError(StokeswimError):
    """Constraint projection failed (degenerate boundary inertia)."""


class IntegrationError(StokeswimError):
    """Trajectory integration produced non-finite state."""


class SteeringError(StokeswimError):
    """Stroke synthesis failed to reach the requested displacement."""


class TrackingError(StokeswimError):
    """Reference trajectory could not be tracked to tolerance."""


class NoCertificateError(StokeswimError):
    """Perturbation search exhausted without a full-rank certificate."""

    def __init__(self, message, best_rank=None):
        super().__init__(message)
        self.best_rank = best_rank


class ConfigError(StokeswimError):
    """Malformed or inconsistent run configuration."""
