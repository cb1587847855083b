"""Calibration (test fairness) by decile, and the error-rate impossibility frontier."""

import warnings
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from .exceptions import EmptySliceError, InfeasibleRateWarning
from .rates import DEFAULT_CONFIDENCE, INFEASIBLE_SLACK, Rate, fpr_from_identity
from .validation import DECILES, check_confidence, check_fraction

DEFAULT_MIN_N = 10
DEFAULT_FNR_GRID = tuple(i / 20 for i in range(21))


@dataclass(frozen=True)
class CalibrationPoint:
    score: int
    rate: Rate

    @property
    def n(self):
        return self.rate.denominator


@dataclass(frozen=True)
class CalibrationCurve:
    """Observed recidivism rate at each decile for one group."""

    group: str
    points: tuple
    missing: tuple
    level: float
    condition: Optional[Mapping] = None

    def by_score(self):
        return {p.score: p for p in self.points}

    @property
    def n(self):
        return sum(p.n for p in self.points)

    def to_dict(self):
        return {
            "group": self.group,
            "confidence": self.level,
            "condition": dict(self.condition) if self.condition else None,
            "missing_deciles": list(self.missing),
            "points": [{"score": p.score, "n": p.n, **p.rate.to_dict()} for p in self.points],
        }


def _condition_mask(d, condition):
    mask = np.ones(len(d), dtype=bool)
    columns = {"charge_degree": d.charge_degrees, "priors": d.priors, "score": d.scores}
    for key, value in condition.items():
        if key in columns:
            mask &= columns[key] == value
        else:
            extra = d.extra or ({},) * len(d)
            mask &= np.array([e.get(key) == value for e in extra], dtype=bool)
    return mask


def calibration_curve(d, group, level=DEFAULT_CONFIDENCE, condition=None):
    """``P(Y = 1 | S = s, R = group)`` for every decile present in the group.

    ``condition`` optionally restricts the slice to records matching a
    mapping of field name (``charge_degree``, ``priors`` or any passthrough
    column) to value, for calibration conditional on covariates.
    """
    level = check_confidence(level)
    mask = d.group_mask(group)
    if not mask.any():
        raise EmptySliceError(f"group {group!r} not present in dataset", group=group)
    if condition:
        mask &= _condition_mask(d, condition)
        if not mask.any():
            raise EmptySliceError(f"group {group!r} has no records matching {dict(condition)}", group=group)
    scores = d.scores[mask]
    outcomes = d.outcomes[mask]
    n_at = np.bincount(scores, minlength=11)
    k_at = np.bincount(scores, weights=outcomes, minlength=11).astype(np.int64)
    points, missing = [], []
    for s in DECILES:
        if n_at[s] == 0:
            missing.append(s)
        else:
            points.append(CalibrationPoint(s, Rate.of(int(k_at[s]), int(n_at[s]), level)))
    return CalibrationCurve(group, tuple(points), tuple(missing), level, condition)


@dataclass(frozen=True)
class DecileComparison:
    score: int
    rate_b: Optional[Rate]
    rate_w: Optional[Rate]
    gap: Optional[float]
    overlap: Optional[bool]
    low_confidence: bool

    @property
    def comparable(self):
        return self.gap is not None

    def to_dict(self):
        return {
            "score": self.score,
            "comparable": self.comparable,
            "gap": self.gap,
            "overlap": self.overlap,
            "low_confidence": self.low_confidence,
            "rate_b": None if self.rate_b is None else self.rate_b.to_dict(),
            "rate_w": None if self.rate_w is None else self.rate_w.to_dict(),
        }


@dataclass(frozen=True)
class FairnessReport:
    group_b: str
    group_w: str
    deciles: tuple
    min_n: int

    @property
    def n_non_overlapping(self):
        return sum(1 for c in self.deciles if c.overlap is False)

    @property
    def n_incomparable(self):
        return sum(1 for c in self.deciles if not c.comparable)

    def to_dict(self):
        return {
            "group_b": self.group_b,
            "group_w": self.group_w,
            "min_n": self.min_n,
            "n_non_overlapping": self.n_non_overlapping,
            "n_incomparable": self.n_incomparable,
            "deciles": [c.to_dict() for c in self.deciles],
        }


def test_fairness_report(curve_b, curve_w, min_n=DEFAULT_MIN_N):
    """Compare two calibration curves decile by decile.

    The gap is ``rate_b - rate_w``. Deciles seen in only one curve are kept
    as incomparable rows. Intervals are judged to overlap when their closed
    ranges intersect; cells with fewer than ``min_n`` records in either group
    are flagged low-confidence.
    """
    b, w = curve_b.by_score(), curve_w.by_score()
    rows = []
    for s in sorted(set(b) | set(w)):
        pb, pw = b.get(s), w.get(s)
        rb = pb.rate if pb else None
        rw = pw.rate if pw else None
        if rb is None or rw is None:
            rows.append(DecileComparison(s, rb, rw, None, None, True))
            continue
        overlap = rb.lower <= rw.upper and rw.lower <= rb.upper
        low = rb.denominator < min_n or rw.denominator < min_n
        rows.append(DecileComparison(s, rb, rw, rb.value - rw.value, overlap, low))
    return FairnessReport(curve_b.group, curve_w.group, tuple(rows), min_n)


# not a pytest test, despite the name
test_fairness_report.__test__ = False


@dataclass(frozen=True)
class FrontierRow:
    fnr: float
    fpr_b: float
    fpr_w: float
    gap: float
    feasible: bool


def impossibility_frontier(p_b, p_w, ppv, fnr_grid=DEFAULT_FNR_GRID):
    """False positive rates two groups must have when they share PPV and FNR.

    For each FNR in the grid, the implied FPR of each group follows from its
    prevalence. With ``p_b > p_w`` and ``fnr < 1`` the gap is strictly
    positive: equal calibration and unequal prevalence rule out equal error
    rates. Rows where either implied FPR exceeds one are marked infeasible.
    """
    for name, value in (("p_b", p_b), ("p_w", p_w), ("ppv", ppv)):
        check_fraction(value, name, open_interval=True)
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", InfeasibleRateWarning)
        for fnr in fnr_grid:
            fpr_b = fpr_from_identity(p_b, ppv, fnr)
            fpr_w = fpr_from_identity(p_w, ppv, fnr)
            rows.append(FrontierRow(float(fnr), fpr_b, fpr_w, fpr_b - fpr_w, max(fpr_b, fpr_w) <= 1.0 + INFEASIBLE_SLACK))
    return rows
