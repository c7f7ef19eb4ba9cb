"""Exception taxonomy shared across the package.

The CLI maps these onto process exit codes: ConfigError -> 1, DataError -> 2,
BoundAuditError -> 3.
"""


class ConfigError(Exception):
    """Invalid configuration: unknown algorithm, bad hyperparameter, learner/label-space mismatch."""


class DataError(Exception):
    """Invalid or missing input data: parse failures, degenerate datasets, bad subsample sizes."""


class BoundAuditError(Exception):
    """The per-instance norm-bound audit found a violated instance."""


class DimensionMismatchError(ConfigError):
    """A feature index fell outside the model's dimension."""


class NumericalDegeneracyError(RuntimeError):
    """A covariance update lost positive definiteness; the state was rolled back."""
