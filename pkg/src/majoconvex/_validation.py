"""Input coercion helpers shared by every module."""

import numpy as np


class DomainError(ValueError):
    """Raised when an input falls outside the domain of an operation."""


class PreconditionError(ValueError):
    """Raised when a documented precondition (e.g. ``x`` majorized by ``y``) fails."""


def as_vector(x, name="x"):
    arr = np.array(x, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise DomainError(f"{name} must be a non-empty 1-d vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} has non-finite entries")
    return arr


def as_positive_vector(x, name="y"):
    arr = as_vector(x, name)
    if np.any(arr <= 0):
        raise DomainError(f"{name} must be componentwise positive")
    return arr


def as_square(F, name="F"):
    arr = np.array(F, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise DomainError(f"{name} must be a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} has non-finite entries")
    return arr


def as_symmetric(A, name="A", tol=1e-12):
    arr = as_square(A, name)
    scale = max(1.0, float(np.max(np.abs(arr))))
    if np.max(np.abs(arr - arr.T)) > tol * scale:
        raise DomainError(f"{name} is not symmetric within {tol:g}")
    return 0.5 * (arr + arr.T)


def same_length(x, y):
    if x.shape != y.shape:
        raise DomainError(f"length mismatch: {x.size} vs {y.size}")
