"""Early-termination rules for partially trained configurations.

Decisions are made on raw accuracy curves (never on transformed values).
The compound rule checks a candidate twice: at the halfway checkpoint it
must beat the bottom tail of everything seen so far, and near the end it
must reach the top tail of the survivors.  A median stopping rule and a
generic checkpoint schedule share the same machinery.

All checks compare the candidate's *running best* accuracy against a
percentile of *running averages* of reference curves, and a candidate is
terminated only on a strict "less than", so an empty or uninformative
reference population never kills anything.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "checkpoints_cr",
    "running_average",
    "percentile_nearest_rank",
    "cr_decide",
    "msr_decide",
    "throughput_factor",
    "survivor_rank_regret",
    "Checkpoint",
    "EtrPolicy",
]

_MODES = ("mean", "literal")
_MSR_MIN_POPULATION = 3


def checkpoints_cr(max_epoch: int, beta: float) -> tuple[int, int]:
    """Compound-rule checkpoint epochs (j1, j2) for a curve of E epochs.

    j1 = floor(E/2), j2 = floor((1 - beta) E).  With tiny E the two can
    coincide, in which case the second checkpoint collapses onto the first.
    """
    if max_epoch < 2:
        raise ValueError(f"max_epoch must be >= 2, got {max_epoch}")
    if not 0.0 < beta <= 0.5:
        raise ValueError(f"beta must lie in (0, 0.5], got {beta}")
    j1 = math.floor(0.5 * max_epoch)
    j2 = math.floor((1.0 - beta) * max_epoch)
    return j1, j2


def running_average(curve: Sequence[float], i: int, j: int, mode: str = "mean") -> float:
    """Average of curve epochs i..j (1-based, inclusive).

    mode="mean" divides by the window length j-i+1.  mode="literal" keeps
    the 1/j prefactor of the printed formula this rule descends from, which
    differs only when i > 1.
    """
    if mode not in _MODES:
        raise ValueError(f"mode must be one of {_MODES}, got {mode!r}")
    if not 1 <= i <= j <= len(curve):
        raise ValueError(f"need 1 <= i <= j <= {len(curve)}, got i={i}, j={j}")
    total = math.fsum(curve[i - 1 : j])
    return total / (j if mode == "literal" else (j - i + 1))


def percentile_nearest_rank(values: Sequence[float], p: float) -> float:
    """Smallest element whose empirical CDF reaches p, for p in (0, 1]."""
    if not 0.0 < p <= 1.0:
        raise ValueError(f"percentile must lie in (0, 1], got {p}")
    if len(values) == 0:
        raise ValueError("empty population")
    ordered = sorted(values)
    rank = math.ceil(p * len(ordered))
    return ordered[rank - 1]


def _window_averages(
    curves: Sequence[Sequence[float]],
    i: int,
    j: int,
    min_len: int,
    mode: str,
) -> list[float]:
    return [running_average(c, i, j, mode) for c in curves if len(c) >= min_len]


def cr_decide(
    y_best: float,
    epoch: int,
    curves: Sequence[Sequence[float]],
    max_epoch: int,
    beta: float = 0.1,
    mode: str = "mean",
) -> bool:
    """Compound-rule decision; True means terminate.

    A no-op (False) away from the two checkpoints and whenever the
    reference population is empty.  At j1 the reference is every curve
    with at least j1 epochs; at j2 it is the survivor set, curves with
    strictly more than j1 epochs (only those long enough to furnish the
    j1..j2 window can contribute an average).
    """
    j1, j2 = checkpoints_cr(max_epoch, beta)
    if epoch == j1:
        population = _window_averages(curves, 1, j1, j1, mode)
        threshold_p = beta
    elif epoch == j2:
        survivors = [c for c in curves if len(c) > j1]
        population = _window_averages(survivors, j1, j2, j2, mode)
        threshold_p = 1.0 - beta
    else:
        return False
    if not population:
        return False
    return y_best < percentile_nearest_rank(population, threshold_p)


def msr_decide(
    y_best: float,
    epoch: int,
    curves: Sequence[Sequence[float]],
    mode: str = "mean",
) -> bool:
    """Median stopping decision; True means terminate.

    Terminates when the running best falls strictly below the midpoint
    median of the running averages f(1..epoch) of curves long enough to
    compare.  Fewer than three reference curves is treated as too little
    evidence.
    """
    if epoch < 1:
        raise ValueError(f"epoch must be >= 1, got {epoch}")
    population = _window_averages(curves, 1, epoch, epoch, mode)
    if len(population) < _MSR_MIN_POPULATION:
        return False
    return y_best < float(np.median(population))


def throughput_factor(beta: float) -> float:
    """Expected per-worker evaluation speedup from compound termination.

    1 / (0.5 b + (1-b)^3 + (1-b) b): the three denominator terms are the
    expected fractions of a full curve spent by configs cut at the first
    checkpoint, configs trained fully, and configs cut at the second.
    """
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    b = beta
    return 1.0 / (0.5 * b + (1.0 - b) ** 3 + (1.0 - b) * b)


def survivor_rank_regret(table, survivor_ids: Sequence[int]) -> float:
    """Mean rank regret of the given configs under the table's ranking.

    Summed in integer rank space and divided once, so the all-survivors
    value equals (n-1)/(2n) exactly.
    """
    ids = list(survivor_ids)
    if not ids:
        raise ValueError("survivor set is empty")
    ranks = table.ranks()
    total = sum(ranks[i] - 1 for i in ids)
    return total / (len(table.entries) * len(ids))


# ---------------------------------------------------------------------------
# engine-facing policy object


@dataclass(frozen=True)
class Checkpoint:
    """One generic termination gate.

    At epoch ``at_epoch`` the candidate's running best is compared to the
    ``aggressiveness``-percentile of reference running averages over epochs
    ``avg_start..avg_end``.  Aggressiveness 0 disables the gate; 1 cuts
    everything short of the reference maximum.
    """

    avg_start: int
    avg_end: int
    at_epoch: int
    aggressiveness: float

    def __post_init__(self) -> None:
        if not 1 <= self.avg_start <= self.avg_end <= self.at_epoch:
            raise ValueError(
                f"need 1 <= avg_start <= avg_end <= at_epoch, got {self}"
            )
        if not 0.0 <= self.aggressiveness <= 1.0:
            raise ValueError("aggressiveness must lie in [0, 1]")


@dataclass(frozen=True)
class EtrPolicy:
    """Early-termination policy the trial engine consults at every epoch.

    kind: "none", "cr" (compound rule), "msr" (median stopping), or
    "custom" (explicit checkpoint schedule).  ``warmup`` applies to msr
    only and defaults to ceil(E/3).
    """

    kind: str = "none"
    beta: float = 0.1
    mode: str = "mean"
    warmup: int | None = None
    checkpoints: tuple[Checkpoint, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ("none", "cr", "msr", "custom"):
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if self.mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}")
        if self.kind == "cr" and not 0.0 < self.beta <= 0.5:
            raise ValueError(f"beta must lie in (0, 0.5], got {self.beta}")
        if self.kind == "custom":
            cps = tuple(self.checkpoints)
            if not cps:
                raise ValueError("custom policy needs at least one checkpoint")
            if any(b.at_epoch <= a.at_epoch for a, b in zip(cps, cps[1:])):
                raise ValueError("checkpoints must be in increasing epoch order")
            object.__setattr__(self, "checkpoints", cps)

    def decide(
        self,
        y_best: float,
        epoch: int,
        curves: Sequence[Sequence[float]],
        max_epoch: int,
    ) -> bool:
        """True if the candidate should be terminated at this epoch."""
        if self.kind == "none":
            return False
        if self.kind == "cr":
            return cr_decide(y_best, epoch, curves, max_epoch, self.beta, self.mode)
        if self.kind == "msr":
            warmup = self.warmup if self.warmup is not None else math.ceil(max_epoch / 3)
            if epoch < warmup:
                return False
            return msr_decide(y_best, epoch, curves, self.mode)
        for idx, cp in enumerate(self.checkpoints):
            if epoch != cp.at_epoch:
                continue
            if cp.aggressiveness == 0.0:
                return False
            eligible = curves
            if idx > 0:
                prev = self.checkpoints[idx - 1].at_epoch
                eligible = [c for c in curves if len(c) > prev]
            population = _window_averages(eligible, cp.avg_start, cp.avg_end, cp.avg_end, self.mode)
            if not population:
                return False
            return y_best < percentile_nearest_rank(population, cp.aggressiveness)
        return False
