"""Hand-built tables shared across test modules."""

import numpy as np

from divbo.space import ParamDef, SearchSpace
from divbo.table import LearningCurve, SurrogateTable, TableEntry


def build_table(accuracy_rows, epoch_seconds=1.0, xs=None):
    """Table over a 1-d space from explicit accuracy curves.

    ``epoch_seconds`` is either a scalar applied everywhere or one
    sequence per row.  ``xs`` overrides the default evenly spaced
    parameter values.
    """
    rows = [tuple(float(a) for a in r) for r in accuracy_rows]
    n = len(rows)
    space = SearchSpace([ParamDef("x", "continuous", bounds=(0.0, 1.0))])
    entries = []
    for i, row in enumerate(rows):
        if np.isscalar(epoch_seconds):
            times = tuple(float(epoch_seconds) for _ in row)
        else:
            times = tuple(float(t) for t in epoch_seconds[i])
        x = xs[i] if xs is not None else (i + 0.5) / n
        entries.append(TableEntry(id=i, values={"x": x}, curve=LearningCurve(row, times)))
    return SurrogateTable(space, entries, len(rows[0]))


def ramp_table(terminals, max_epoch=5, epoch_seconds=1.0):
    """Curves that rise linearly to the given terminal accuracies."""
    rows = []
    for t in terminals:
        rows.append([t * j / max_epoch for j in range(1, max_epoch + 1)])
    return build_table(rows, epoch_seconds=epoch_seconds)
