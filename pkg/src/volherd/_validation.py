"""Input validation helpers shared by the estimators."""

import numpy as np
from sklearn.utils.validation import check_array, column_or_1d

from .exceptions import DegenerateSeriesError, DomainError, InsufficientDataError


def check_samples(X, *, positive=False, min_samples=1, name="samples"):
    """Coerce ``X`` to a finite 1-d float array and apply basic checks.

    A 2-d input with a single column is accepted, mirroring the
    ``(n_samples, 1)`` shape sklearn transformers receive.
    """
    X = check_array(X, ensure_2d=False, dtype=np.float64, ensure_all_finite=True,
                    ensure_min_samples=0)
    if X.ndim == 2:
        X = column_or_1d(X)
    if positive and np.any(X <= 0):
        raise DomainError(f"{name} must be strictly positive")
    if X.shape[0] < min_samples:
        raise InsufficientDataError(f"need at least {min_samples} {name}, got {X.shape[0]}")
    return X


def check_series(x, *, min_length=2):
    x = check_samples(x, min_samples=min_length, name="series values")
    if np.ptp(x) == 0:
        raise DegenerateSeriesError("series has zero variance")
    return x
