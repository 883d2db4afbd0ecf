"""Input-validation helpers shared by the surrogate estimators."""

from __future__ import annotations

import numpy as np
from sklearn.exceptions import NotFittedError

__all__ = ["check_X_y", "check_X", "check_is_fitted"]


def check_X_y(X, y, min_samples: int = 1):
    """Coerce to float arrays, require 2-d X / 1-d y, matching and finite."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"X must be 2-dimensional, got shape {X.shape}")
    if y.ndim != 1:
        raise ValueError(f"y must be 1-dimensional, got shape {y.shape}")
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"X and y disagree on sample count: {X.shape[0]} vs {y.shape[0]}")
    if X.shape[0] < min_samples:
        raise ValueError(f"need at least {min_samples} samples, got {X.shape[0]}")
    if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
        raise ValueError("X and y must be finite")
    return X, y


def check_X(X, n_features: int):
    """Coerce a query matrix and require the fitted feature count."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2 or X.shape[1] != n_features:
        raise ValueError(f"expected shape (*, {n_features}), got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("query points must be finite")
    return X


def check_is_fitted(estimator, attribute: str) -> None:
    if not hasattr(estimator, attribute):
        raise NotFittedError(
            f"{type(estimator).__name__} is not fitted yet; call fit() before predicting"
        )
