"""Auditing recidivism risk scores for calibration, error-rate balance and disparate impact."""

__version__ = "0.1.0"

from .effectsize import (
    EffectSizeReport,
    overall_effect_sizes,
    ScoreDistribution,
    cohens_d,
    overlap_bound_check,
    score_histogram,
    tv_distance,
)
from .estimators import FairnessAuditor, MinMaxPolicy, ScoreCoarsener
from .fairness import (
    CalibrationCurve,
    FairnessReport,
    calibration_curve,
    impossibility_frontier,
    test_fairness_report,
)
from .impact import (
    ImpactReport,
    PenaltyPolicy,
    delta_general,
    delta_nonrecidivators,
    delta_recidivators,
    incarceration_ratio,
    minmax_penalty,
)
from .ingest import Dataset, Record, Schema, filter_cohort, load_dataset, parse_dataset, serialize_dataset
from .rates import (
    ConfusionMatrix,
    GroupRates,
    Rate,
    RiskClass,
    coarsen,
    confusion_matrix,
    fpr_from_identity,
    group_rates,
    rates_from_matrix,
    wilson_interval,
)
from .simulate import SimConfig, generate_population, monte_carlo_delta, monte_carlo_deltas
from .subgroup import PriorBin, StratifiedRates, stratified_fpr
