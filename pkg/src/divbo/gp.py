"""Gaussian-process surrogate with sampled hyperparameters.

The kernel is anisotropic Matern 5/2.  Rather than optimizing kernel
hyperparameters to a point estimate, ``fit`` draws a set of posterior
samples (random-walk Metropolis over the log hyperparameters, broad
log-normal priors) and keeps a Cholesky factorization per sample;
acquisition values are later averaged over the samples.  Any of the
hyperparameters can instead be pinned to a fixed value, which removes it
from the sampler — pinning all of them makes the model an ordinary fixed-
kernel GP, handy for exact tests.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular
from scipy.spatial.distance import cdist
from sklearn.base import BaseEstimator

from ._validation import check_is_fitted, check_X, check_X_y

__all__ = ["matern52", "GaussianProcessSurrogate", "SingularKernelError"]

_SQRT5 = math.sqrt(5.0)


class SingularKernelError(ValueError):
    """Kernel matrix stayed non-positive-definite at the maximum jitter."""


def matern52(x1, x2, lengthscales, amplitude: float = 1.0) -> np.ndarray | float:
    """Matern 5/2 covariance with per-dimension lengthscales.

        k(r) = amplitude * (1 + sqrt(5) r + 5 r^2 / 3) * exp(-sqrt(5) r)

    where r is the Euclidean distance after dividing each coordinate by its
    lengthscale.  Accepts single points (returns a float) or row-stacked
    matrices (returns the cross-covariance matrix).
    """
    ell = np.asarray(lengthscales, dtype=float)
    if np.any(ell <= 0):
        raise ValueError("lengthscales must be positive")
    if amplitude <= 0:
        raise ValueError("amplitude must be positive")
    a = np.atleast_2d(np.asarray(x1, dtype=float))
    b = np.atleast_2d(np.asarray(x2, dtype=float))
    r = cdist(a / ell, b / ell)
    k = amplitude * (1.0 + _SQRT5 * r + (5.0 / 3.0) * r**2) * np.exp(-_SQRT5 * r)
    if np.asarray(x1).ndim == 1 and np.asarray(x2).ndim == 1:
        return float(k[0, 0])
    return k


class _Sample:
    """One hyperparameter draw with its cached factorization."""

    __slots__ = ("lengthscales", "amplitude", "noise", "chol", "alpha")

    def __init__(self, lengthscales, amplitude, noise, chol, alpha):
        self.lengthscales = lengthscales
        self.amplitude = amplitude
        self.noise = noise
        self.chol = chol
        self.alpha = alpha


class GaussianProcessSurrogate(BaseEstimator):
    """GP regressor whose kernel hyperparameters are posterior samples.

    Parameters
    ----------
    n_hyper_samples : int
        Number of kept hyperparameter draws (K).
    burn_in, thinning : int
        Metropolis schedule: ``burn_in`` discarded steps, then one draw
        kept every ``thinning`` steps.
    lengthscales, amplitude, noise : optional fixed values
        Pin the corresponding hyperparameter instead of sampling it.
        ``noise`` is the observation noise variance.
    prior_median_lengthscale : float
        Median of the log-normal lengthscale prior.
    step_size : float
        Metropolis proposal scale in log space.
    seed : int or None
        Seed for the sampler; fits are deterministic given it.
    """

    def __init__(
        self,
        n_hyper_samples: int = 1,
        burn_in: int = 50,
        thinning: int = 10,
        lengthscales=None,
        amplitude: float | None = None,
        noise: float | None = None,
        prior_median_lengthscale: float = 0.3,
        step_size: float = 0.2,
        seed: int | None = None,
    ):
        self.n_hyper_samples = n_hyper_samples
        self.burn_in = burn_in
        self.thinning = thinning
        self.lengthscales = lengthscales
        self.amplitude = amplitude
        self.noise = noise
        self.prior_median_lengthscale = prior_median_lengthscale
        self.step_size = step_size
        self.seed = seed

    # ------------------------------------------------------------------
    def fit(self, X, y):
        X, y = check_X_y(X, y, min_samples=2)
        if self.n_hyper_samples < 1:
            raise ValueError("n_hyper_samples must be >= 1")
        n, d = X.shape
        self.X_ = X
        self.y_mean_ = float(np.mean(y))
        self.resid_ = y - self.y_mean_
        var_y = float(np.var(y))
        var_y = max(var_y, 1e-10)

        # parameter vector in log space: [ell_1..ell_d, amplitude, noise]
        mu = np.concatenate(
            [
                np.full(d, math.log(self.prior_median_lengthscale)),
                [math.log(var_y)],
                [math.log(1e-4 * var_y)],
            ]
        )
        prior_sd = np.concatenate([np.full(d, 1.0), [1.0], [1.5]])

        fixed = np.zeros(d + 2, dtype=bool)
        phi = mu.copy()
        if self.lengthscales is not None:
            ell = np.asarray(self.lengthscales, dtype=float)
            ell = np.full(d, float(ell)) if ell.ndim == 0 else ell
            if ell.shape != (d,) or np.any(ell <= 0):
                raise ValueError(f"lengthscales must be {d} positive values")
            phi[:d] = np.log(ell)
            fixed[:d] = True
        if self.amplitude is not None:
            if self.amplitude <= 0:
                raise ValueError("amplitude must be positive")
            phi[d] = math.log(self.amplitude)
            fixed[d] = True
        if self.noise is not None:
            if self.noise <= 0:
                raise ValueError("noise variance must be positive")
            phi[d + 1] = math.log(self.noise)
            fixed[d + 1] = True

        kept = self._run_chain(phi, mu, prior_sd, fixed)
        self.samples_ = []
        for p in kept:
            ell, theta0, noise2 = np.exp(p[:d]), float(np.exp(p[d])), float(np.exp(p[d + 1]))
            L, jitter = self._factorize(ell, theta0, noise2, strict=True)
            alpha = cho_solve((L, True), self.resid_)
            self.samples_.append(_Sample(ell, theta0, noise2, L, alpha))
        return self

    def _run_chain(self, phi, mu, prior_sd, fixed) -> list[np.ndarray]:
        if bool(fixed.all()):
            return [phi.copy()]
        rng = np.random.default_rng(self.seed)
        free = ~fixed
        cur = phi.copy()
        cur_lp = self._log_prob(cur, mu, prior_sd)
        n_steps = self.burn_in + self.thinning * self.n_hyper_samples
        kept: list[np.ndarray] = []
        for step in range(1, n_steps + 1):
            prop = cur.copy()
            prop[free] += self.step_size * rng.standard_normal(int(free.sum()))
            prop_lp = self._log_prob(prop, mu, prior_sd)
            if prop_lp - cur_lp > math.log(max(rng.random(), 1e-300)):
                cur, cur_lp = prop, prop_lp
            if step > self.burn_in and (step - self.burn_in) % self.thinning == 0:
                kept.append(cur.copy())
        return kept[: self.n_hyper_samples]

    def _log_prob(self, phi, mu, prior_sd) -> float:
        d = self.X_.shape[1]
        ell = np.exp(phi[:d])
        theta0 = float(np.exp(phi[d]))
        noise2 = float(np.exp(phi[d + 1]))
        try:
            L, _ = self._factorize(ell, theta0, noise2, strict=False)
        except SingularKernelError:
            return -np.inf
        alpha = cho_solve((L, True), self.resid_)
        ll = (
            -0.5 * float(self.resid_ @ alpha)
            - float(np.sum(np.log(np.diag(L))))
            - 0.5 * len(self.resid_) * math.log(2.0 * math.pi)
        )
        lp = -0.5 * float(np.sum(((phi - mu) / prior_sd) ** 2))
        return ll + lp

    def _factorize(self, ell, theta0, noise2, strict: bool):
        """Lower Cholesky of K + noise2*I, escalating jitter if needed."""
        gram = matern52(self.X_, self.X_, ell, theta0)
        base = gram + noise2 * np.eye(len(gram))
        jitter = 0.0
        while True:
            try:
                L = cholesky(base + jitter * np.eye(len(base)), lower=True)
                return L, jitter
            except np.linalg.LinAlgError:
                pass
            except ValueError:
                pass
            if jitter == 0.0:
                jitter = 1e-8 * theta0
            elif jitter < 1e-4 * theta0:
                jitter = min(jitter * 10.0, 1e-4 * theta0)
            else:
                if strict:
                    raise SingularKernelError(
                        f"kernel not positive definite at maximum jitter {1e-4 * theta0:g}"
                    )
                raise SingularKernelError("rejected during sampling")

    # ------------------------------------------------------------------
    def predict_samples(self, X):
        """Per-hyper-sample posterior moments.

        Returns (means, variances), each of shape (K, n_query); variances
        are of the latent function (no observation noise).
        """
        check_is_fitted(self, "samples_")
        X = check_X(X, self.X_.shape[1])
        means = np.empty((len(self.samples_), X.shape[0]))
        variances = np.empty_like(means)
        for i, s in enumerate(self.samples_):
            kstar = matern52(X, self.X_, s.lengthscales, s.amplitude)
            means[i] = self.y_mean_ + kstar @ s.alpha
            v = solve_triangular(s.chol, kstar.T, lower=True)
            variances[i] = np.maximum(s.amplitude - np.sum(v**2, axis=0), 0.0)
        return means, variances

    def predict(self, X, return_var: bool = False):
        """Posterior moments averaged over hyperparameter samples."""
        means, variances = self.predict_samples(X)
        mean = means.mean(axis=0)
        if not return_var:
            return mean
        var = variances.mean(axis=0) + means.var(axis=0)
        return mean, var
