"""Ensemble metrics over repeated trials.

A censored trial (no recorded tau) never contributes to time statistics
but stays in the denominator of success rates; an ensemble that is all
censored has no expected time at all, which is an error rather than a
number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

__all__ = [
    "TrialRow",
    "TrialEnsemble",
    "UndefinedMetricError",
    "success_rate",
    "expected_time",
    "theoretical_diversity",
    "parallel_gain",
    "rank_sum_pvalue",
    "merge_ensembles",
]

SECONDS_PER_HOUR = 3600.0


class UndefinedMetricError(ValueError):
    """The requested statistic does not exist for this ensemble."""


@dataclass(frozen=True)
class TrialRow:
    """One trial outcome as persisted to a results file."""

    trial_index: int
    seed: int
    tau: float | None
    evals_started: int
    evals_terminated: int
    evals_completed: int
    duplicates_resolved: int


@dataclass(frozen=True)
class TrialEnsemble:
    """Rows from one run, stamped with the settings fingerprint."""

    rows: tuple[TrialRow, ...]
    fingerprint: str

    def __post_init__(self) -> None:
        if not self.rows:
            raise ValueError("ensemble needs at least one trial")
        object.__setattr__(self, "rows", tuple(self.rows))

    @property
    def taus(self) -> tuple[float | None, ...]:
        return tuple(r.tau for r in self.rows)

    @property
    def censored_count(self) -> int:
        return sum(1 for r in self.rows if r.tau is None)


def merge_ensembles(ensembles: Sequence[TrialEnsemble]) -> TrialEnsemble:
    """Concatenate ensembles that share a fingerprint; mixing is an error."""
    if not ensembles:
        raise ValueError("nothing to merge")
    prints = {e.fingerprint for e in ensembles}
    if len(prints) > 1:
        raise ValueError(f"cannot merge ensembles with different fingerprints: {sorted(prints)}")
    rows: list[TrialRow] = []
    for e in ensembles:
        rows.extend(e.rows)
    return TrialEnsemble(tuple(rows), ensembles[0].fingerprint)


def success_rate(taus: Sequence[float | None], t: float) -> float:
    """Fraction of trials that reached the target within time t.

    Censored trials count against the denominator; ``t`` may be ``inf``
    for the final success fraction.
    """
    if not len(taus):
        raise ValueError("empty ensemble")
    if not (t >= 0 or math.isinf(t)):
        raise ValueError(f"time must be >= 0, got {t}")
    hits = sum(1 for tau in taus if tau is not None and tau <= t)
    return hits / len(taus)


def expected_time(
    taus: Sequence[float | None], in_hours: bool = False
) -> tuple[float, float, int]:
    """(mean, population stddev, censored count) over non-censored taus.

    Raises :class:`UndefinedMetricError` when every trial is censored.
    """
    observed = np.array([tau for tau in taus if tau is not None], dtype=float)
    censored = len(taus) - len(observed)
    if observed.size == 0:
        raise UndefinedMetricError("expected time is undefined: every trial is censored")
    scale = SECONDS_PER_HOUR if in_hours else 1.0
    return float(observed.mean() / scale), float(observed.std(ddof=0) / scale), censored


def theoretical_diversity(success, m: int):
    """Independent-portfolio success curve: s -> 1 - (1 - s)^m.

    Vectorized over ``success``; scalars in, float out.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    s = np.asarray(success, dtype=float)
    if np.any((s < 0) | (s > 1)):
        raise ValueError("success rates must lie in [0, 1]")
    out = 1.0 - (1.0 - s) ** m
    return float(out) if np.ndim(success) == 0 else out


def parallel_gain(expected_single: float, expected_multi: float, m: int) -> float:
    """Speedup-per-worker ratio E1 / (m * Em)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if expected_single <= 0 or expected_multi <= 0:
        raise ValueError("expected times must be positive")
    return expected_single / (m * expected_multi)


def rank_sum_pvalue(a: Sequence[float], b: Sequence[float], alternative: str = "less") -> float:
    """One-sided Wilcoxon rank-sum p-value (acceptance-suite utility)."""
    return float(stats.ranksums(list(a), list(b), alternative=alternative).pvalue)
