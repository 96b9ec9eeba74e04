"""Exception hierarchy shared by the solvers, the analysis layer and the CLI."""


class QdotmodError(Exception):
    """Base class for all package errors."""


class SolverError(QdotmodError):
    """A numerical routine could not produce a trustworthy result."""


class SingularSystem(SolverError):
    pass


class IntegrationFailure(SolverError):
    pass


class TruncationNotConverged(SolverError):
    pass


class DomainError(SolverError):
    pass


class NoCutoffInRange(SolverError):
    pass


class InsufficientRange(SolverError):
    pass


class ConfigError(QdotmodError):
    """Malformed, incomplete or unknown configuration input."""
