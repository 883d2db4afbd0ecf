"""Acquisition functions (maximization convention) and hedge arm selection.

All functions take posterior mean and *variance* (not standard deviation)
and the incumbent best transformed objective.  They are vectorized: pass
scalars to get a float back, arrays to get an array.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

__all__ = [
    "expected_improvement",
    "probability_of_improvement",
    "upper_confidence_bound",
    "integrated_acquisition",
    "ACQUISITIONS",
    "HedgeState",
    "hedge_probabilities",
    "hedge_select",
    "hedge_update",
]


def _moments(mean, var):
    mean = np.asarray(mean, dtype=float)
    var = np.asarray(var, dtype=float)
    if np.any(var < 0):
        raise ValueError("variance must be non-negative")
    return mean, var


def _maybe_scalar(out, *inputs) -> np.ndarray | float:
    if all(np.ndim(x) == 0 for x in inputs):
        return float(out)
    return out


def expected_improvement(mean, var, best: float):
    """E[max(f - best, 0)] under a normal posterior.

    Collapses to max(mean - best, 0) where the variance is zero.
    """
    mean, var = _moments(mean, var)
    sigma = np.sqrt(var)
    improve = mean - best
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(sigma > 0, improve / np.where(sigma > 0, sigma, 1.0), 0.0)
    ei = np.where(
        sigma > 0,
        sigma * (z * norm.cdf(z) + norm.pdf(z)),
        np.maximum(improve, 0.0),
    )
    return _maybe_scalar(ei, mean, var)


def probability_of_improvement(mean, var, best: float):
    """P(f > best); degenerates to a step function at zero variance."""
    mean, var = _moments(mean, var)
    sigma = np.sqrt(var)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(sigma > 0, (mean - best) / np.where(sigma > 0, sigma, 1.0), 0.0)
    pi = np.where(sigma > 0, norm.cdf(z), (mean > best).astype(float))
    return _maybe_scalar(pi, mean, var)


def upper_confidence_bound(mean, var, best: float = 0.0, kappa: float = 2.0):
    """mean + kappa * std; ``best`` is accepted and ignored for uniformity."""
    if kappa < 0:
        raise ValueError("kappa must be >= 0")
    mean, var = _moments(mean, var)
    out = mean + kappa * np.sqrt(var)
    return _maybe_scalar(out, mean, var)


ACQUISITIONS = {
    "ei": expected_improvement,
    "pi": probability_of_improvement,
    "ucb": upper_confidence_bound,
}


def integrated_acquisition(kind: str, means, variances, best: float, kappa: float = 2.0):
    """Average an acquisition over hyperparameter samples.

    ``means`` and ``variances`` have shape (K, n): one row per posterior
    hyperparameter sample.  Returns the length-n arithmetic mean of the
    per-sample acquisition values.
    """
    try:
        fn = ACQUISITIONS[kind]
    except KeyError:
        raise ValueError(f"unknown acquisition {kind!r}") from None
    means = np.atleast_2d(np.asarray(means, dtype=float))
    variances = np.atleast_2d(np.asarray(variances, dtype=float))
    if means.shape != variances.shape:
        raise ValueError(f"shape mismatch: {means.shape} vs {variances.shape}")
    if kind == "ucb":
        vals = fn(means, variances, best, kappa=kappa)
    else:
        vals = fn(means, variances, best)
    return np.asarray(vals).mean(axis=0)


# ---------------------------------------------------------------------------
# hedge selection across acquisition arms


@dataclass(frozen=True)
class HedgeState:
    """Cumulative gains per arm plus the softmax temperature."""

    gains: tuple[float, ...]
    eta: float = 1.0

    def __post_init__(self) -> None:
        if not self.gains:
            raise ValueError("need at least one arm")
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        object.__setattr__(self, "gains", tuple(float(g) for g in self.gains))


def hedge_probabilities(state: HedgeState) -> np.ndarray:
    """Softmax of eta * gains, computed with max subtraction for stability."""
    g = state.eta * np.asarray(state.gains)
    g = g - g.max()
    w = np.exp(g)
    return w / w.sum()


def hedge_select(state: HedgeState, rng: np.random.Generator) -> int:
    """Sample an arm index from the softmax distribution."""
    p = hedge_probabilities(state)
    return int(rng.choice(len(p), p=p))


def hedge_update(state: HedgeState, rewards) -> HedgeState:
    """New state with each arm's reward added to its cumulative gain."""
    rewards = tuple(float(r) for r in rewards)
    if len(rewards) != len(state.gains):
        raise ValueError(f"expected {len(state.gains)} rewards, got {len(rewards)}")
    return HedgeState(tuple(g + r for g, r in zip(state.gains, rewards)), eta=state.eta)
