import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from riskaudit.effectsize import overall_effect_sizes
from riskaudit.estimators import FairnessAuditor, MinMaxPolicy, ScoreCoarsener
from riskaudit.impact import PenaltyPolicy, delta_general
from riskaudit.ingest import BLACK, WHITE
from riskaudit.rates import group_rates


def test_params_roundtrip_and_clone():
    est = FairnessAuditor(threshold=5, t_high=3.0)
    params = est.get_params()
    assert params["threshold"] == 5 and params["t_high"] == 3.0
    copy = clone(est)
    assert copy.get_params() == params
    copy.set_params(threshold=6)
    assert est.threshold == 5


def test_coarsener_transform():
    out = ScoreCoarsener(threshold=4).fit_transform(np.array([[1], [4], [5], [10]]))
    assert out.tolist() == [[0], [0], [1], [1]]
    with pytest.raises(Exception):
        ScoreCoarsener().fit(np.array([0, 3]))


def test_pipeline_with_policy():
    pipe = make_pipeline(MinMaxPolicy(t_low=1.0, t_high=4.0, threshold=4))
    pipe.fit(np.array([[1]]))
    assert pipe.predict(np.array([[2], [9]])).tolist() == [1.0, 4.0]


def test_unfitted_estimators_raise():
    with pytest.raises(NotFittedError):
        ScoreCoarsener().transform([[3]])
    with pytest.raises(NotFittedError):
        MinMaxPolicy().predict([[3]])
    with pytest.raises(NotFittedError):
        FairnessAuditor().predict([[3]])


def test_auditor_matches_functional_api(cohort):
    X = cohort.scores.reshape(-1, 1)
    est = FairnessAuditor().fit(X, cohort.outcomes, groups=cohort.groups)
    pol = PenaltyPolicy()
    for g in (BLACK, WHITE):
        assert est.rates_[g].fpr.value == group_rates(cohort, g).fpr.value
    assert est.impact_["nonrecidivators"].delta_exact == delta_general(cohort, pol, 0, 0).delta_exact
    assert est.effect_size_.tv_distance == overall_effect_sizes(cohort).tv_distance
    assert est.incarceration_ratio_ == pytest.approx(
        est.rates_[BLACK].fpr.value / est.rates_[WHITE].fpr.value, rel=1e-15)
    assert all(r.bound_holds for r in est.overlap_bounds_.values())
    assert est.predict(np.array([[4], [5]])).tolist() == [0, 1]


def test_fit_dataset_keeps_columns(cohort):
    est = FairnessAuditor().fit_dataset(cohort)
    assert est.dataset_ is cohort


def test_inconsistent_inputs_rejected():
    with pytest.raises(ValueError):
        FairnessAuditor().fit([[1], [2]], [0], groups=["a", "b"])
