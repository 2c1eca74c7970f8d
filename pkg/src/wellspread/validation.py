"""Input validation helpers used by the public functions and estimators."""

from __future__ import annotations

import numbers

import numpy as np
from sklearn.utils import check_array

from .errors import DomainError, InvalidDimensionError


def check_matrix(A, name="A", min_rows=1, min_cols=1):
    """Return ``A`` as a finite C-contiguous float64 2-D array."""
    try:
        A = check_array(
            A,
            dtype=np.float64,
            order="C",
            ensure_min_samples=min_rows,
            ensure_min_features=min_cols,
        )
    except ValueError as exc:
        raise InvalidDimensionError(f"{name}: {exc}") from exc
    return A


def check_vector(x, name="x", length=None, nonzero=False):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise InvalidDimensionError(f"{name} must be 1-D, got shape {x.shape}")
    if length is not None and x.shape[0] != length:
        raise InvalidDimensionError(f"{name} must have length {length}, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise DomainError(f"{name} contains non-finite entries")
    if nonzero and not np.any(x):
        raise DomainError(f"{name} must be nonzero")
    return x


def check_int(value, name, minimum=None, maximum=None):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise DomainError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if minimum is not None and value < minimum:
        raise DomainError(f"{name} must be >= {minimum}, got {value}")
    if maximum is not None and value > maximum:
        raise DomainError(f"{name} must be <= {maximum}, got {value}")
    return value


def check_even(value, name):
    value = check_int(value, name, minimum=2)
    if value % 2:
        raise DomainError(f"{name} must be even, got {value}")
    return value


def check_fraction(value, name, low=0.0, high=1.0, closed_low=False, closed_high=False):
    value = float(value)
    ok_low = value >= low if closed_low else value > low
    ok_high = value <= high if closed_high else value < high
    if not (ok_low and ok_high and np.isfinite(value)):
        lb = "[" if closed_low else "("
        rb = "]" if closed_high else ")"
        raise DomainError(f"{name} must lie in {lb}{low}, {high}{rb}, got {value}")
    return value


def unit(x):
    """Normalize a nonzero vector to unit Euclidean length."""
    norm = np.linalg.norm(x)
    if norm == 0.0:
        raise DomainError("cannot normalize the zero vector")
    return x / norm
