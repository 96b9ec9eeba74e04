"""Simulator for a quantum-dot/nano-cavity electro-optic modulator."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DomainError,
    InsufficientRange,
    IntegrationFailure,
    NoCutoffInRange,
    SingularSystem,
    SolverError,
    TruncationNotConverged,
)
from .model import Constant, Sinusoid, Step, SystemParams, TimeSeries, evaluate_drive, to_angular

__all__ = [
    "ConfigError",
    "Constant",
    "DomainError",
    "InsufficientRange",
    "IntegrationFailure",
    "NoCutoffInRange",
    "SingularSystem",
    "Sinusoid",
    "SolverError",
    "Step",
    "SystemParams",
    "TimeSeries",
    "TruncationNotConverged",
    "evaluate_drive",
    "to_angular",
]
