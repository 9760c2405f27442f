"""Exception hierarchy shared across the package.

Every error carries a short machine-readable ``code`` so the CLI can map
failures onto manifest entries and exit codes without string matching.
"""


class IcefrontError(Exception):
    """Base class for all package errors."""

    code = "error"


class ConfigError(IcefrontError):
    """Invalid configuration input (bad value, missing field, parse failure)."""

    code = "config"


class ModelError(ConfigError):
    """Parameter set violates a model invariant."""

    code = "model"


class SolverError(IcefrontError):
    """Numerical failure during a solver run."""

    code = "solver"


class SingularSystemError(SolverError):
    """Tridiagonal elimination hit a vanishing pivot."""

    code = "singular-system"


class BlowUpError(SolverError):
    """A field value became non-finite."""

    code = "blow-up"


class StabilityError(ConfigError):
    """Explicit time step violates the stability bound."""

    code = "stability"


class CampaignError(IcefrontError):
    """A UQ campaign failed (bad sample, failed run, ill-conditioned system)."""

    code = "campaign"
