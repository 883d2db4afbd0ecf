"""Diversified-portfolio Bayesian optimization on tabular benchmarks.

The package simulates hyperparameter optimization against tables of
pre-evaluated learning curves under a deterministic virtual clock: a
portfolio of surrogate/acquisition arms proposes configurations, weak
ones are cut early by termination rules, and repeated seeded trials are
summarized into time-to-target metrics.
"""

__version__ = "0.1.0"

from .acquisition import (
    HedgeState,
    expected_improvement,
    hedge_probabilities,
    hedge_select,
    hedge_update,
    integrated_acquisition,
    probability_of_improvement,
    upper_confidence_bound,
)
from .engine import (
    Arm,
    HistoryEntry,
    SelectionRecord,
    TrialResult,
    default_portfolio,
    history_snapshot,
    run_trial,
)
from .forest import RandomForestSurrogate
from .gp import GaussianProcessSurrogate, SingularKernelError, matern52
from .metrics import (
    TrialEnsemble,
    TrialRow,
    UndefinedMetricError,
    expected_time,
    merge_ensembles,
    parallel_gain,
    rank_sum_pvalue,
    success_rate,
    theoretical_diversity,
)
from .sobol import UnsupportedDimensionError, sobol_points
from .space import ParamDef, SearchSpace
from .table import (
    CurveModel,
    LearningCurve,
    SurrogateTable,
    TableEntry,
    TableFormatError,
    generate_synthetic,
    load_table,
    write_table,
)
from .termination import (
    Checkpoint,
    EtrPolicy,
    checkpoints_cr,
    cr_decide,
    msr_decide,
    percentile_nearest_rank,
    running_average,
    survivor_rank_regret,
    throughput_factor,
)
from .transform import hybrid_transform, minmax_rescale

__all__ = [
    "__version__",
    "Arm",
    "Checkpoint",
    "CurveModel",
    "EtrPolicy",
    "GaussianProcessSurrogate",
    "HedgeState",
    "HistoryEntry",
    "LearningCurve",
    "ParamDef",
    "RandomForestSurrogate",
    "SearchSpace",
    "SelectionRecord",
    "SingularKernelError",
    "SurrogateTable",
    "TableEntry",
    "TableFormatError",
    "TrialEnsemble",
    "TrialResult",
    "TrialRow",
    "UndefinedMetricError",
    "UnsupportedDimensionError",
    "checkpoints_cr",
    "cr_decide",
    "default_portfolio",
    "expected_improvement",
    "expected_time",
    "generate_synthetic",
    "hedge_probabilities",
    "hedge_select",
    "hedge_update",
    "history_snapshot",
    "hybrid_transform",
    "integrated_acquisition",
    "load_table",
    "matern52",
    "merge_ensembles",
    "minmax_rescale",
    "msr_decide",
    "parallel_gain",
    "percentile_nearest_rank",
    "probability_of_improvement",
    "rank_sum_pvalue",
    "run_trial",
    "running_average",
    "sobol_points",
    "success_rate",
    "survivor_rank_regret",
    "theoretical_diversity",
    "throughput_factor",
    "upper_confidence_bound",
    "write_table",
]
