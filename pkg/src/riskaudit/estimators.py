"""scikit-learn compatible wrappers around the audit functions.

These let the coarsening step and the penalty policy sit inside a
``Pipeline``, and let a whole audit be run as ``FairnessAuditor().fit(X, y,
groups=...)`` with results exposed as fitted attributes.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .effectsize import overall_effect_sizes, overlap_bound_check
from .exceptions import UndefinedRateError
from .fairness import DEFAULT_MIN_N, calibration_curve, test_fairness_report
from .impact import PenaltyPolicy, delta_general, incarceration_ratio, penalties
from .ingest import BLACK, FELONY, WHITE, Dataset
from .rates import DEFAULT_CONFIDENCE, DEFAULT_THRESHOLD, group_rates
from .validation import (
    check_confidence,
    check_groups,
    check_outcomes,
    check_scores,
    check_threshold,
)


def _scores_from_X(X):
    X = np.asarray(X)
    if X.ndim == 2:
        if X.shape[1] != 1:
            raise ValueError(f"expected a single score column, got shape {X.shape}")
        X = X[:, 0]
    return check_scores(X, "X")


class ScoreCoarsener(TransformerMixin, BaseEstimator):
    """Map decile scores to 1 (high risk) or 0 (low risk): high iff ``score > threshold``."""

    def __init__(self, threshold=DEFAULT_THRESHOLD):
        self.threshold = threshold

    def fit(self, X, y=None):
        check_threshold(self.threshold)
        _scores_from_X(X)
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        return (_scores_from_X(X) > self.threshold).astype(np.int64).reshape(-1, 1)


class MinMaxPolicy(BaseEstimator):
    """Two-level penalty policy; ``predict`` returns each defendant's penalty."""

    def __init__(self, t_low=0.0, t_high=1.0, threshold=DEFAULT_THRESHOLD):
        self.t_low = t_low
        self.t_high = t_high
        self.threshold = threshold

    def fit(self, X=None, y=None):
        self.policy_ = PenaltyPolicy(self.t_low, self.t_high, self.threshold)
        return self

    def predict(self, X):
        check_is_fitted(self, "policy_")
        return penalties(_scores_from_X(X), self.policy_)


class FairnessAuditor(BaseEstimator):
    """Full audit of a score against outcomes for two groups.

    Parameters
    ----------
    threshold : int, default 4
        High risk means score strictly above this value.
    confidence : float, default 0.95
        Level of every Wilson interval.
    group_b, group_w : str
        The two groups compared; differences are always ``b - w``.
    t_low, t_high : float, default 0 and 1
        Penalty policy used for the impact figures.
    min_n : int, default 10
        Decile cells smaller than this are flagged low-confidence.

    Attributes
    ----------
    dataset_ : Dataset
    rates_ : dict of group -> GroupRates
    calibration_ : dict of group -> CalibrationCurve
    fairness_report_ : FairnessReport
    impact_ : dict with ``nonrecidivators`` and ``recidivators`` ImpactReports
    incarceration_ratio_ : float or None
    effect_size_ : EffectSizeReport on the any-outcome histograms
    overlap_bounds_ : dict of outcome -> EffectSizeReport
    """

    def __init__(
        self,
        threshold=DEFAULT_THRESHOLD,
        confidence=DEFAULT_CONFIDENCE,
        group_b=BLACK,
        group_w=WHITE,
        t_low=0.0,
        t_high=1.0,
        min_n=DEFAULT_MIN_N,
    ):
        self.threshold = threshold
        self.confidence = confidence
        self.group_b = group_b
        self.group_w = group_w
        self.t_low = t_low
        self.t_high = t_high
        self.min_n = min_n

    def fit(self, X, y, groups):
        scores = _scores_from_X(X)
        outcomes = check_outcomes(y)
        groups = check_groups(groups, len(scores))
        if len(outcomes) != len(scores):
            raise ValueError("X and y have inconsistent lengths")
        n = len(scores)
        d = Dataset(
            ids=[str(i) for i in range(n)],
            groups=groups,
            scores=scores,
            outcomes=outcomes,
            charge_degrees=[FELONY] * n,
            priors=np.zeros(n, dtype=np.int64),
        )
        return self.fit_dataset(d)

    def fit_dataset(self, d):
        """Fit directly on a :class:`Dataset`, keeping its charge and prior columns."""
        level = check_confidence(self.confidence)
        policy = PenaltyPolicy(self.t_low, self.t_high, self.threshold)
        pair = (self.group_b, self.group_w)
        self.dataset_ = d
        self.policy_ = policy
        self.rates_ = {g: group_rates(d, g, policy.threshold, level) for g in pair}
        self.calibration_ = {g: calibration_curve(d, g, level) for g in pair}
        self.fairness_report_ = test_fairness_report(
            self.calibration_[self.group_b], self.calibration_[self.group_w], self.min_n
        )
        self.impact_ = {
            "nonrecidivators": delta_general(d, policy, 0, 0, *pair),
            "recidivators": delta_general(d, policy, 1, 1, *pair),
        }
        try:
            self.incarceration_ratio_ = incarceration_ratio(self.rates_[self.group_b], self.rates_[self.group_w])
        except UndefinedRateError:
            self.incarceration_ratio_ = None
        self.effect_size_ = overall_effect_sizes(d, *pair)
        self.overlap_bounds_ = {y: overlap_bound_check(d, policy, y, *pair) for y in (0, 1)}
        return self

    def predict(self, X):
        """Coarsened risk class (1 = high risk) at the fitted threshold."""
        check_is_fitted(self, "policy_")
        return (_scores_from_X(X) > self.policy_.threshold).astype(np.int64)
