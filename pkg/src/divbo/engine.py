"""Virtual-time trial engine: portfolio optimization against a lookup table.

A trial replays hyperparameter optimization against a tabular benchmark
under a deterministic virtual clock.  ``workers`` simulated workers train
configurations epoch by epoch; each epoch completion is an event that
advances the clock by that configuration's recorded epoch time.  Model
fitting consumes no virtual time unless ``model_fit_seconds`` says
otherwise.  Every source of randomness flows from the trial seed, so a
trial is a pure function of (table, settings, seed).

Selection rotates through a portfolio of (surrogate, acquisition) arms —
the diversification this package is named for — or, alternatively, runs a
hedge bandit over acquisitions on a single GP, or a uniform-random
baseline.  Early termination is delegated to an
:class:`~divbo.termination.EtrPolicy`, consulted on raw accuracies after
every completed epoch.

Duplicate handling: with several workers the optimizer may nominate a
configuration that is already being trained elsewhere.  The four
strategies are evaluate-anyway (``naive``), pick a random or the
next-ranked free candidate (``random``, ``next_candidate``), or share
partial results: under ``in_progress`` every in-flight configuration's
best-so-far enters the shared history after each epoch, which keeps it
out of the candidate pool entirely; its entry is self-corrected to the
full-curve value on completion.
"""

from __future__ import annotations

import heapq
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .acquisition import HedgeState, hedge_select, hedge_update, integrated_acquisition
from .forest import RandomForestSurrogate
from .gp import GaussianProcessSurrogate
from .table import SurrogateTable
from .termination import EtrPolicy
from .transform import hybrid_transform

__all__ = [
    "Arm",
    "default_portfolio",
    "HistoryEntry",
    "history_snapshot",
    "SelectionRecord",
    "TrialResult",
    "run_trial",
    "fit_arm_model",
    "incumbent_best",
    "DUPLICATE_STRATEGIES",
    "HEDGE_ACQUISITIONS",
]

DUPLICATE_STRATEGIES = ("naive", "random", "next_candidate", "in_progress")
HEDGE_ACQUISITIONS = ("ei", "pi", "ucb")
_IN_PROGRESS = "in_progress"
_TERMINATED = "terminated"
_COMPLETE = "complete"


@dataclass(frozen=True)
class Arm:
    """One portfolio member: a surrogate family plus an acquisition."""

    model: str
    acquisition: str
    kappa: float = 2.0

    def __post_init__(self) -> None:
        if self.model not in ("gp", "rf"):
            raise ValueError(f"unknown surrogate {self.model!r}")
        if self.acquisition not in ("ei", "pi", "ucb"):
            raise ValueError(f"unknown acquisition {self.acquisition!r}")

    @property
    def name(self) -> str:
        return f"{self.model}-{self.acquisition}"


def default_portfolio() -> tuple[Arm, ...]:
    """The six-arm diversified default: {gp, rf} x {ei, pi, ucb}."""
    return (
        Arm("gp", "ei"),
        Arm("gp", "pi"),
        Arm("gp", "ucb"),
        Arm("rf", "ei"),
        Arm("rf", "pi"),
        Arm("rf", "ucb"),
    )


@dataclass
class HistoryEntry:
    """Observed state of one configuration.

    ``curve`` holds the raw accuracies recorded so far; ``transformed_best``
    is the transform of the best of them, the value surrogates are fit on.
    Status moves in_progress -> terminated | complete, never backwards.
    """

    config_id: int
    status: str
    curve: list[float]
    transformed_best: float


def history_snapshot(history: dict[int, HistoryEntry]) -> tuple[HistoryEntry, ...]:
    """Point-in-time copy; later engine mutations do not leak into it."""
    return tuple(
        HistoryEntry(e.config_id, e.status, list(e.curve), e.transformed_best)
        for e in history.values()
    )


@dataclass(frozen=True)
class SelectionRecord:
    """Diagnostic log line for one selection."""

    index: int
    worker: int
    arm: str
    config_id: int
    collided: bool


@dataclass(frozen=True)
class TrialResult:
    """Outcome of one simulated trial.

    ``tau`` is the virtual time at which the running best raw accuracy
    first exceeded the target, or None for a censored trial.  The counters
    satisfy started = completed + terminated + in-flight-at-end, and
    ``duplicates_resolved`` counts selections whose first-choice candidate
    was already being trained elsewhere.
    """

    tau: float | None
    best_trace: tuple[tuple[float, float], ...]
    evals_started: int
    evals_completed: int
    evals_terminated: int
    duplicates_resolved: int
    epochs_run: int
    seed: int
    history: tuple[HistoryEntry, ...] | None = None
    selections: tuple[SelectionRecord, ...] | None = None

    @property
    def success(self) -> bool:
        return self.tau is not None

    @property
    def in_flight_at_end(self) -> int:
        return self.evals_started - self.evals_completed - self.evals_terminated


# ---------------------------------------------------------------------------
# selection helpers (exposed for direct testing)


def fit_arm_model(arm: Arm, X: np.ndarray, y: np.ndarray, seed: int, gp_samples: int = 1):
    if arm.model == "gp":
        return GaussianProcessSurrogate(n_hyper_samples=gp_samples, seed=seed).fit(X, y)
    return RandomForestSurrogate(seed=seed).fit(X, y)


def incumbent_best(entries: Sequence[HistoryEntry]) -> float:
    """Best transformed value among completed entries.

    Falls back to the best over everything observed when nothing has
    completed yet (e.g. every early entry was terminated), so improvement
    acquisitions stay defined.
    """
    completed = [e.transformed_best for e in entries if e.status == _COMPLETE]
    if completed:
        return max(completed)
    if not entries:
        raise ValueError("no history to take an incumbent from")
    return max(e.transformed_best for e in entries)


class _Assignment:
    __slots__ = ("config_id", "curve")

    def __init__(self, config_id: int):
        self.config_id = config_id
        self.curve: list[float] = []


class _Trial:
    """Mutable state of one running simulation."""

    def __init__(
        self,
        table: SurrogateTable,
        portfolio: Sequence[Arm],
        algorithm: str,
        workers: int,
        alpha: float,
        etr: EtrPolicy,
        duplicate_strategy: str,
        target_c: float,
        seed: int,
        time_budget: float | None,
        dispatch: str,
        gp_samples: int,
        hedge_eta: float,
        model_fit_seconds: float,
        keep_history: bool,
    ):
        if algorithm not in ("portfolio", "hedge", "random"):
            raise ValueError(f"unknown algorithm {algorithm!r}")
        if duplicate_strategy not in DUPLICATE_STRATEGIES:
            raise ValueError(f"unknown duplicate strategy {duplicate_strategy!r}")
        if dispatch not in ("idle_any", "synchronous"):
            raise ValueError(f"unknown dispatch mode {dispatch!r}")
        if workers < 1:
            raise ValueError("workers must be >= 1")
        if algorithm == "portfolio" and not portfolio:
            raise ValueError("portfolio must have at least one arm")
        if time_budget is not None and time_budget <= 0:
            raise ValueError("time_budget must be positive")
        if model_fit_seconds < 0:
            raise ValueError("model_fit_seconds must be >= 0")

        self.table = table
        self.features = table.feature_matrix()
        self.portfolio = tuple(portfolio)
        self.algorithm = algorithm
        self.workers = workers
        self.alpha = alpha
        self.etr = etr
        self.strategy = duplicate_strategy
        self.target_c = target_c
        self.seed = seed
        self.time_budget = time_budget
        self.dispatch = dispatch
        self.gp_samples = gp_samples
        self.model_fit_seconds = model_fit_seconds
        self.keep_history = keep_history

        self.rng = np.random.default_rng(seed)
        self.max_epoch = table.max_epoch
        self.cold_start_n = max(2, workers)

        self.history: dict[int, HistoryEntry] = {}
        self.assignments: dict[int, _Assignment] = {}
        self.events: list[tuple[float, int]] = []
        self.idle: set[int] = set()

        self.evals_started = 0
        self.evals_completed = 0
        self.evals_terminated = 0
        self.duplicates = 0
        self.epochs_run = 0
        self.selection_count = 0
        self.arm_cursor = 0

        self.best_acc = -math.inf
        self.best_trace: list[tuple[float, float]] = []
        self.tau: float | None = None

        self.hedge_state = HedgeState((0.0,) * len(HEDGE_ACQUISITIONS), eta=hedge_eta)
        self.hedge_nominees: tuple[int, ...] | None = None

        self.selection_log: list[SelectionRecord] = []

    # -- pools ---------------------------------------------------------

    def in_flight_ids(self) -> set[int]:
        return {a.config_id for a in self.assignments.values()}

    def pool_ids(self) -> list[int]:
        """Candidates the optimizer may nominate, per duplicate strategy."""
        done = {
            cid for cid, e in self.history.items() if e.status in (_TERMINATED, _COMPLETE)
        }
        excluded = done
        if self.strategy == _IN_PROGRESS:
            excluded = done | self.in_flight_ids()
        return [e.id for e in self.table.entries if e.id not in excluded]

    def unstarted_ids(self) -> list[int]:
        busy = self.in_flight_ids() | set(self.history.keys())
        return [e.id for e in self.table.entries if e.id not in busy]

    # -- selection -----------------------------------------------------

    def select(self, worker: int) -> int | None:
        """Pick the next configuration for a freed worker, or None to idle."""
        unstarted = self.unstarted_ids()
        if self.algorithm == "random":
            if not unstarted:
                return None
            cid = int(self.rng.choice(np.asarray(unstarted)))
            self._log(worker, "random", cid, False)
            return cid

        self.selection_count += 1
        if self.selection_count <= self.cold_start_n or len(self.history) < 2:
            if not unstarted:
                return None
            cid = unstarted[0]
            self._log(worker, "sobol", cid, False)
            return cid

        pool = self.pool_ids()
        if not pool:
            return None
        entries = list(self.history.values())
        fit_ids = [e.config_id for e in entries]
        X = self.features[fit_ids]
        y = np.array([e.transformed_best for e in entries])
        best = incumbent_best(entries)
        fit_seed = int(self.rng.integers(2**31))
        pool_feats = self.features[pool]

        if self.algorithm == "hedge":
            arm_label, candidate, ranked = self._hedge_nominate(X, y, best, fit_seed, pool, pool_feats)
        else:
            arm = self.portfolio[self.arm_cursor % len(self.portfolio)]
            self.arm_cursor += 1
            model = fit_arm_model(arm, X, y, fit_seed, self.gp_samples)
            means, variances = model.predict_samples(pool_feats)
            scores = integrated_acquisition(arm.acquisition, means, variances, best, kappa=arm.kappa)
            order = np.argsort(-scores, kind="stable")
            ranked = [pool[i] for i in order]
            candidate = ranked[0]
            arm_label = arm.name

        final, collided = self._resolve_duplicate(candidate, ranked, pool)
        if collided:
            self.duplicates += 1
        if final is not None:
            self._log(worker, arm_label, final, collided)
        return final

    def _hedge_nominate(self, X, y, best, fit_seed, pool, pool_feats):
        model = GaussianProcessSurrogate(n_hyper_samples=self.gp_samples, seed=fit_seed).fit(X, y)
        means, variances = model.predict_samples(pool_feats)
        nominees = []
        rankings = []
        for acq in HEDGE_ACQUISITIONS:
            scores = integrated_acquisition(acq, means, variances, best)
            order = np.argsort(-scores, kind="stable")
            rankings.append([pool[i] for i in order])
            nominees.append(rankings[-1][0])
        if self.hedge_nominees is not None:
            # reward each arm with the current posterior mean at its
            # previous nominee, now that the model has absorbed the last
            # evaluation
            prev = self.features[list(self.hedge_nominees)]
            rewards = model.predict_samples(prev)[0].mean(axis=0)
            self.hedge_state = hedge_update(self.hedge_state, rewards)
        self.hedge_nominees = tuple(nominees)
        pick = hedge_select(self.hedge_state, self.rng)
        return f"hedge-{HEDGE_ACQUISITIONS[pick]}", nominees[pick], rankings[pick]

    def _resolve_duplicate(self, candidate, ranked, pool):
        """Apply the duplicate strategy; returns (config or None, collided)."""
        in_flight = self.in_flight_ids()
        if candidate not in in_flight:
            return candidate, False
        if self.strategy == "naive":
            return candidate, True
        if self.strategy == "random":
            free = [cid for cid in pool if cid not in in_flight]
            if not free:
                return None, True
            return int(self.rng.choice(np.asarray(free))), True
        if self.strategy == "next_candidate":
            for cid in ranked:
                if cid not in in_flight:
                    return cid, True
            return None, True
        # in_progress keeps in-flight configs out of the pool entirely
        return candidate, True

    def _log(self, worker, arm, cid, collided):
        if self.keep_history:
            self.selection_log.append(
                SelectionRecord(self.selection_count, worker, arm, cid, collided)
            )

    # -- bookkeeping -----------------------------------------------------

    def assign(self, worker: int, config_id: int, now: float) -> None:
        self.assignments[worker] = _Assignment(config_id)
        self.evals_started += 1
        first = self.table.curve(config_id).epoch_seconds[0]
        heapq.heappush(self.events, (now + self.model_fit_seconds + first, worker))

    def dispatch_free_worker(self, worker: int, now: float) -> None:
        if self.dispatch == "idle_any":
            cid = self.select(worker)
            if cid is not None:
                self.assign(worker, cid, now)
            return
        self.idle.add(worker)
        if len(self.idle) == self.workers:
            batch = sorted(self.idle)
            self.idle.clear()
            for wid in batch:
                cid = self.select(wid)
                if cid is not None:
                    self.assign(wid, cid, now)
                else:
                    self.idle.add(wid)

    def upsert_premature(self, config_id: int, curve: list[float], y_best: float) -> None:
        g = hybrid_transform(y_best, self.alpha)
        entry = self.history.get(config_id)
        if entry is None:
            self.history[config_id] = HistoryEntry(config_id, _IN_PROGRESS, curve, g)
        else:
            entry.curve = curve
            entry.transformed_best = g

    def finalize(self, config_id: int, curve: list[float], status: str) -> None:
        g = hybrid_transform(max(curve), self.alpha)
        entry = self.history.get(config_id)
        if entry is None:
            self.history[config_id] = HistoryEntry(config_id, status, curve, g)
        else:
            entry.status = status
            entry.curve = curve
            entry.transformed_best = g

    def record_best(self, now: float, acc: float) -> None:
        if acc <= self.best_acc:
            return
        self.best_acc = acc
        if self.best_trace and self.best_trace[-1][0] == now:
            self.best_trace[-1] = (now, acc)
        else:
            self.best_trace.append((now, acc))

    # -- main loop -------------------------------------------------------

    def run(self) -> TrialResult:
        for wid in range(self.workers):
            self.dispatch_free_worker(wid, 0.0)

        while self.events:
            now, wid = heapq.heappop(self.events)
            if self.time_budget is not None and now > self.time_budget:
                break
            assignment = self.assignments[wid]
            cid = assignment.config_id
            table_curve = self.table.curve(cid)
            epoch = len(assignment.curve) + 1
            assignment.curve.append(table_curve.accuracy[epoch - 1])
            self.epochs_run += 1
            y_best = max(assignment.curve)

            if self.strategy == _IN_PROGRESS:
                self.upsert_premature(cid, assignment.curve, y_best)
            self.record_best(now, y_best)
            if self.best_acc > self.target_c:
                self.tau = now
                break

            terminate = False
            if self.etr.kind != "none" and epoch < self.max_epoch:
                curves = [e.curve for e in self.history.values()]
                terminate = self.etr.decide(y_best, epoch, curves, self.max_epoch)

            if terminate:
                del self.assignments[wid]
                self.finalize(cid, assignment.curve, _TERMINATED)
                self.evals_terminated += 1
                self.dispatch_free_worker(wid, now)
            elif epoch == self.max_epoch:
                del self.assignments[wid]
                self.finalize(cid, assignment.curve, _COMPLETE)
                self.evals_completed += 1
                self.dispatch_free_worker(wid, now)
            else:
                heapq.heappush(self.events, (now + table_curve.epoch_seconds[epoch], wid))

        return TrialResult(
            tau=self.tau,
            best_trace=tuple(self.best_trace),
            evals_started=self.evals_started,
            evals_completed=self.evals_completed,
            evals_terminated=self.evals_terminated,
            duplicates_resolved=self.duplicates,
            epochs_run=self.epochs_run,
            seed=self.seed,
            history=history_snapshot(self.history) if self.keep_history else None,
            selections=tuple(self.selection_log) if self.keep_history else None,
        )


def run_trial(
    table: SurrogateTable,
    target_c: float,
    *,
    portfolio: Sequence[Arm] | None = None,
    algorithm: str = "portfolio",
    workers: int = 1,
    alpha: float = 0.3,
    etr: EtrPolicy = EtrPolicy("none"),
    duplicate_strategy: str = "in_progress",
    seed: int = 0,
    time_budget: float | None = None,
    dispatch: str = "idle_any",
    gp_samples: int = 1,
    hedge_eta: float = 1.0,
    model_fit_seconds: float = 0.0,
    keep_history: bool = False,
) -> TrialResult:
    """Simulate one trial; see the module docstring for semantics.

    The trial ends when the running best raw accuracy strictly exceeds
    ``target_c`` (success, ``tau`` = the clock at that epoch event), when
    the candidate pool and all in-flight work are exhausted, or when the
    time budget runs out (both censored, ``tau`` = None).
    """
    if not 0.0 <= target_c < 1.0:
        raise ValueError(f"target accuracy must lie in [0, 1), got {target_c}")
    reachable = max(e.curve.terminal_best for e in table.entries)
    if target_c >= reachable:
        warnings.warn(
            f"target {target_c} is not exceeded by any table entry (max {reachable}); "
            "the trial can never succeed",
            stacklevel=2,
        )
    trial = _Trial(
        table=table,
        portfolio=default_portfolio() if portfolio is None else portfolio,
        algorithm=algorithm,
        workers=workers,
        alpha=alpha,
        etr=etr,
        duplicate_strategy=duplicate_strategy,
        target_c=target_c,
        seed=seed,
        time_budget=time_budget,
        dispatch=dispatch,
        gp_samples=gp_samples,
        hedge_eta=hedge_eta,
        model_fit_seconds=model_fit_seconds,
        keep_history=keep_history,
    )
    return trial.run()
