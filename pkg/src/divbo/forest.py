"""Random-forest surrogate with inter-tree predictive variance.

Wraps sklearn's RandomForestRegressor: 50 fully-grown trees by default,
each split drawn from a random ceil(D/3) feature subset, bootstrap
resampling on by default.  The predictive mean is the usual forest
average; the predictive variance is the population variance of the
per-tree predictions, which is what portfolio acquisition functions
consume in place of a Bayesian posterior.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.ensemble import RandomForestRegressor

from ._validation import check_is_fitted, check_X, check_X_y

__all__ = ["RandomForestSurrogate"]


class RandomForestSurrogate(BaseEstimator):
    def __init__(
        self,
        n_trees: int = 50,
        min_samples_split: int = 2,
        bootstrap: bool = True,
        seed: int | None = None,
    ):
        self.n_trees = n_trees
        self.min_samples_split = min_samples_split
        self.bootstrap = bootstrap
        self.seed = seed

    def fit(self, X, y):
        X, y = check_X_y(X, y, min_samples=2)
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        self.n_features_ = X.shape[1]
        self.model_ = RandomForestRegressor(
            n_estimators=self.n_trees,
            min_samples_split=self.min_samples_split,
            bootstrap=self.bootstrap,
            max_features=max(1, math.ceil(X.shape[1] / 3)),
            random_state=self.seed,
            n_jobs=1,
        )
        self.model_.fit(X, y)
        return self

    def predict(self, X, return_var: bool = False):
        """Forest mean, and optionally the across-tree variance."""
        check_is_fitted(self, "model_")
        X = check_X(X, self.n_features_)
        per_tree = np.stack([tree.predict(X) for tree in self.model_.estimators_])
        mean = per_tree.mean(axis=0)
        if not return_var:
            return mean
        return mean, per_tree.var(axis=0)

    def predict_samples(self, X):
        """Single-sample view matching the GP surrogate's interface."""
        mean, var = self.predict(X, return_var=True)
        return mean[None, :], var[None, :]
