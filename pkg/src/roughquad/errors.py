"""Exception taxonomy shared across the toolkit."""


class ToolkitError(Exception):
    """Base class for all errors raised by roughquad."""


class GridLookupError(ToolkitError, LookupError):
    """A requested time is not a point of the partition."""


class ModelInvalidError(ToolkitError, ValueError):
    """Covariance model parameters violate the catalog invariants,
    or an evaluation exposed a non-PSD symptom."""


class SimulationError(ToolkitError, RuntimeError):
    """Sampling failed (factorization deficit, non-finite statistic, ...)."""


class NumericalError(ToolkitError, RuntimeError):
    """A numerical computation failed or did not stabilize."""


class ConfigError(ToolkitError, ValueError):
    """Experiment configuration is malformed or inconsistent."""
