"""Tabular benchmark: pre-evaluated learning curves behind a lookup API.

A table couples a search space with one entry per configuration; an entry
carries the full per-epoch accuracy curve and per-epoch wall time, so a
simulated trial can "train" any configuration by lookup instead of by
running the underlying model.

On disk a table is JSON lines: a header object
``{"space": [...], "max_epoch": E}`` followed by one object per entry
``{"id": i, "params": {...}, "accuracy": [...], "epoch_seconds": [...]}``.
Floats are written with full round-trip precision, so writing and
re-loading reproduces values exactly.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Any, Iterable, Mapping

import numpy as np

from .space import SearchSpace

__all__ = [
    "LearningCurve",
    "TableEntry",
    "SurrogateTable",
    "TableFormatError",
    "CurveModel",
    "generate_synthetic",
    "load_table",
    "write_table",
]

MIN_ENTRIES = 11


class TableFormatError(ValueError):
    """A table file violates the JSON-lines schema; messages cite line numbers."""


@dataclass(frozen=True)
class LearningCurve:
    """Per-epoch accuracies in [0, 1] and strictly positive epoch times."""

    accuracy: tuple[float, ...]
    epoch_seconds: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "accuracy", tuple(float(a) for a in self.accuracy))
        object.__setattr__(self, "epoch_seconds", tuple(float(t) for t in self.epoch_seconds))
        if len(self.accuracy) != len(self.epoch_seconds):
            raise ValueError(
                f"curve length mismatch: {len(self.accuracy)} accuracies vs "
                f"{len(self.epoch_seconds)} epoch times"
            )
        if not self.accuracy:
            raise ValueError("curve must have at least one epoch")
        for a in self.accuracy:
            if not 0.0 <= a <= 1.0 or not math.isfinite(a):
                raise ValueError(f"accuracy {a} outside [0, 1]")
        for t in self.epoch_seconds:
            if not t > 0 or not math.isfinite(t):
                raise ValueError(f"epoch time {t} must be positive and finite")

    def __len__(self) -> int:
        return len(self.accuracy)

    def best_until(self, epoch: int) -> float:
        """Best accuracy over the first ``epoch`` epochs (1-based, inclusive)."""
        if not 1 <= epoch <= len(self.accuracy):
            raise ValueError(f"epoch {epoch} outside 1..{len(self.accuracy)}")
        return max(self.accuracy[:epoch])

    @property
    def terminal_best(self) -> float:
        return max(self.accuracy)


@dataclass(frozen=True)
class TableEntry:
    id: int
    values: Mapping[str, Any]
    curve: LearningCurve


class SurrogateTable:
    """Search space plus one learning curve per configuration."""

    def __init__(self, space: SearchSpace, entries: Iterable[TableEntry], max_epoch: int):
        self.space = space
        self.entries: tuple[TableEntry, ...] = tuple(entries)
        self.max_epoch = int(max_epoch)
        if len(self.entries) < MIN_ENTRIES:
            raise ValueError(f"table needs at least {MIN_ENTRIES} entries, got {len(self.entries)}")
        for i, e in enumerate(self.entries):
            if e.id != i:
                raise ValueError(f"entry ids must be contiguous from 0; position {i} has id {e.id}")
            if len(e.curve) != self.max_epoch:
                raise ValueError(
                    f"entry {e.id}: curve has {len(e.curve)} epochs, table max_epoch is {self.max_epoch}"
                )
        self._features: np.ndarray | None = None
        self._ranks: dict[int, int] | None = None
        self._digest: str | None = None

    def __len__(self) -> int:
        return len(self.entries)

    def curve(self, config_id: int) -> LearningCurve:
        return self.entries[config_id].curve

    def terminal_best(self, config_id: int) -> float:
        return self.entries[config_id].curve.terminal_best

    def best_until(self, config_id: int, epoch: int) -> float:
        return self.entries[config_id].curve.best_until(epoch)

    def feature_matrix(self) -> np.ndarray:
        """(n, feature_dim) encoding of every entry, cached."""
        if self._features is None:
            self._features = np.array([self.space.encode(e.values) for e in self.entries])
        return self._features

    def ranks(self) -> dict[int, int]:
        """1-based rank per config id; rank 1 is the best terminal-best.

        Ties broken by ascending id, so ranks are a permutation of 1..n.
        """
        if self._ranks is None:
            order = sorted(self.entries, key=lambda e: (-e.curve.terminal_best, e.id))
            self._ranks = {e.id: pos + 1 for pos, e in enumerate(order)}
        return self._ranks

    def rank_regret(self, config_id: int) -> float:
        """(rank - 1) / n; 0 for the table's best configuration."""
        return (self.ranks()[config_id] - 1) / len(self.entries)

    def target_accuracy(self, k: int) -> float:
        """k-th largest terminal-best accuracy (k=1 is the single best)."""
        if not 1 <= k <= len(self.entries):
            raise ValueError(f"k must lie in 1..{len(self.entries)}, got {k}")
        best = sorted((e.curve.terminal_best for e in self.entries), reverse=True)
        return best[k - 1]

    def content_digest(self) -> str:
        """sha256 over the serialized table; identifies it in run metadata."""
        if self._digest is None:
            h = hashlib.sha256()
            for line in _serialize_lines(self):
                h.update(line.encode())
                h.update(b"\n")
            self._digest = h.hexdigest()[:16]
        return self._digest


# ---------------------------------------------------------------------------
# serialization


def _serialize_lines(table: SurrogateTable) -> Iterable[str]:
    header = {"space": table.space.to_json_list(), "max_epoch": table.max_epoch}
    yield json.dumps(header, sort_keys=True)
    for e in table.entries:
        yield json.dumps(
            {
                "id": e.id,
                "params": dict(e.values),
                "accuracy": list(e.curve.accuracy),
                "epoch_seconds": list(e.curve.epoch_seconds),
            },
            sort_keys=True,
        )


def write_table(table: SurrogateTable, path: str) -> None:
    """Write a table as JSON lines (UTF-8, one object per line)."""
    with open(path, "w", encoding="utf-8") as fh:
        for line in _serialize_lines(table):
            fh.write(line)
            fh.write("\n")


def load_table(path: str) -> SurrogateTable:
    """Load a JSON-lines table; format errors cite the offending line."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    lines = [ln for ln in lines if ln.strip()]
    if not lines:
        raise TableFormatError(f"{path}: empty table file")

    def parse(lineno: int, text: str) -> Any:
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise TableFormatError(f"{path}: line {lineno}: invalid JSON ({exc.msg})") from exc

    header = parse(1, lines[0])
    if not isinstance(header, dict) or "space" not in header or "max_epoch" not in header:
        raise TableFormatError(f"{path}: line 1: header must carry 'space' and 'max_epoch'")
    try:
        space = SearchSpace.from_json_list(header["space"])
    except (ValueError, KeyError, TypeError) as exc:
        raise TableFormatError(f"{path}: line 1: bad space definition: {exc}") from exc
    max_epoch = header["max_epoch"]

    entries = []
    for lineno, text in enumerate(lines[1:], start=2):
        obj = parse(lineno, text)
        try:
            curve = LearningCurve(tuple(obj["accuracy"]), tuple(obj["epoch_seconds"]))
            entries.append(TableEntry(id=int(obj["id"]), values=obj["params"], curve=curve))
        except (KeyError, TypeError, ValueError) as exc:
            raise TableFormatError(f"{path}: line {lineno}: bad entry: {exc}") from exc
    try:
        return SurrogateTable(space, entries, max_epoch)
    except ValueError as exc:
        raise TableFormatError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# synthetic benchmark generation


@dataclass(frozen=True)
class CurveModel:
    """Knobs for the synthetic learning-curve generator.

    Terminal accuracies come from a smooth multimodal bump mixture over the
    unit cube, min-max rescaled into ``y_range`` (kept inside [0, 1) because
    an accuracy of exactly 1 is rejected downstream by the objective
    transform).  Curves rise toward the terminal value with per-config rate
    ``lambda``; ``late_fraction`` of configurations, chosen as the top
    performers, additionally have their first floor(E/4) epochs suppressed
    toward ``late_floor`` to mimic learning curves that start poorly but
    win in the end.
    """

    max_epoch: int = 15
    y_range: tuple[float, float] = (0.05, 0.95)
    lambda_range: tuple[float, float] = (1.0, 5.0)
    noise: float = 0.01
    late_fraction: float = 0.0
    late_floor: float = 0.05
    epoch_time_range: tuple[float, float] = (10.0, 60.0)
    n_modes: int = 6

    def __post_init__(self) -> None:
        if self.max_epoch < 1:
            raise ValueError("max_epoch must be >= 1")
        lo, hi = self.y_range
        if not 0.0 <= lo < hi < 1.0:
            raise ValueError(f"y_range must satisfy 0 <= lo < hi < 1, got {self.y_range}")
        if not 0.0 <= self.late_fraction <= 1.0:
            raise ValueError("late_fraction must lie in [0, 1]")
        if not 0.0 <= self.late_floor < 1.0:
            raise ValueError("late_floor must lie in [0, 1)")
        tlo, thi = self.epoch_time_range
        if not 0 < tlo <= thi:
            raise ValueError(f"epoch_time_range must be positive, got {self.epoch_time_range}")
        llo, lhi = self.lambda_range
        if llo < 0 or lhi < llo:
            raise ValueError(f"bad lambda_range {self.lambda_range}")
        if self.noise < 0:
            raise ValueError("noise must be >= 0")


_ACC_CEIL = 0.9999  # keep generated accuracies strictly below 1


def generate_synthetic(
    space: SearchSpace, n: int, seed: int, model: CurveModel = CurveModel()
) -> SurrogateTable:
    """Deterministic synthetic table: Sobol design + bump-mixture curves."""
    if n < MIN_ENTRIES:
        raise ValueError(f"need at least {MIN_ENTRIES} configurations, got {n}")
    rng = np.random.default_rng(seed)
    units = space.sobol_unit(n, skip=1)
    d = space.dim
    e_max = model.max_epoch

    centers = rng.uniform(0.0, 1.0, size=(model.n_modes, d))
    widths = rng.uniform(0.08, 0.35, size=model.n_modes)
    weights = rng.uniform(0.3, 1.0, size=model.n_modes)
    sq = ((units[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    raw = (weights * np.exp(-sq / (2.0 * widths**2))).sum(axis=1)

    lo, hi = model.y_range
    spread = raw.max() - raw.min()
    if spread > 0:
        terminal = lo + (raw - raw.min()) * (hi - lo) / spread
    else:
        terminal = np.full(n, 0.5 * (lo + hi))

    lam = rng.uniform(*model.lambda_range, size=n)
    noise = rng.normal(0.0, model.noise, size=(n, e_max)) if model.noise > 0 else np.zeros((n, e_max))
    epoch_time = rng.uniform(*model.epoch_time_range, size=n)

    epochs = np.arange(1, e_max + 1, dtype=float)
    with np.errstate(divide="ignore"):
        rise = 1.0 - np.exp(-epochs[None, :] / np.where(lam > 1e-12, lam, 1e-12)[:, None])
    rise[lam <= 1e-12, :] = 1.0
    acc = terminal[:, None] * rise + noise

    n_late = math.ceil(model.late_fraction * n)
    if n_late > 0:
        window = e_max // 4
        if window > 0:
            late_ids = np.argsort(-terminal, kind="stable")[:n_late]
            ramp = (epochs[:window] - 1.0) / window
            floor = model.late_floor
            acc[np.ix_(late_ids, np.arange(window))] = (
                floor + (acc[np.ix_(late_ids, np.arange(window))] - floor) * ramp[None, :]
            )

    acc = np.clip(acc, 0.0, _ACC_CEIL)

    entries = []
    for i in range(n):
        curve = LearningCurve(tuple(acc[i]), tuple(float(epoch_time[i]) for _ in range(e_max)))
        entries.append(TableEntry(id=i, values=space.decode(units[i]), curve=curve))
    return SurrogateTable(space, entries, e_max)
