"""Input validation helpers shared by the functional API and the estimators."""

import numbers

import numpy as np
from sklearn.utils.validation import check_consistent_length, column_or_1d

from .exceptions import ConfigError, DomainError

MIN_SCORE = 1
MAX_SCORE = 10
DECILES = tuple(range(MIN_SCORE, MAX_SCORE + 1))


def check_scores(scores, name="scores"):
    """Return ``scores`` as a 1-d int64 array of deciles in 1..10."""
    arr = column_or_1d(np.asarray(scores), warn=True)
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        as_int = arr.astype(np.int64)
        if not np.array_equal(as_int, arr):
            raise DomainError(f"{name} must be integer deciles")
        arr = as_int
    arr = arr.astype(np.int64, copy=False)
    if arr.size and (arr.min() < MIN_SCORE or arr.max() > MAX_SCORE):
        raise DomainError(f"{name} must lie in {MIN_SCORE}..{MAX_SCORE}")
    return arr


def check_outcomes(y, name="y"):
    """Return ``y`` as a 1-d int8 array of 0/1 outcomes."""
    arr = column_or_1d(np.asarray(y), warn=True)
    if arr.dtype == bool:
        return arr.astype(np.int8)
    if not np.all(np.isin(arr, (0, 1))):
        raise DomainError(f"{name} must contain only 0 and 1")
    return arr.astype(np.int8)


def check_groups(groups, n):
    arr = column_or_1d(np.asarray(groups, dtype=object), warn=True)
    check_consistent_length(arr, np.empty(n))
    return arr.astype(str).astype(object)


def check_threshold(threshold):
    if isinstance(threshold, bool) or not isinstance(threshold, numbers.Integral):
        raise ConfigError(f"threshold must be an integer, got {threshold!r}")
    return int(threshold)


def check_confidence(level):
    level = float(level)
    if not 0.0 < level < 1.0:
        raise ConfigError(f"confidence level must lie in (0, 1), got {level}")
    return level


def check_fraction(value, name, *, open_interval=False):
    """Validate a probability. ``open_interval`` excludes the endpoints 0 and 1."""
    value = float(value)
    if open_interval:
        if not 0.0 < value < 1.0:
            raise DomainError(f"{name} must lie in (0, 1), got {value}")
    elif not 0.0 <= value <= 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {value}")
    return value
