"""Exception types shared across the package."""


class LdmaError(Exception):
    """Base class for package-specific failures."""


class ConfigError(LdmaError):
    """Invalid scenario/figure configuration (CLI exit code 2)."""


class NumericalRegimeError(LdmaError):
    """Inputs outside the numerically meaningful regime (CLI exit code 3).

    Raised e.g. for ill-conditioned effective channels and for closed-form
    bounds evaluated where their Gram matrix loses positive definiteness.
    """
