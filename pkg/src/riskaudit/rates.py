"""Coarsening scores, confusion matrices, and the rates derived from them."""

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import norm

from .exceptions import DomainError, EmptySliceError, InfeasibleRateWarning, UndefinedRateError
from .validation import check_confidence, check_fraction, check_threshold

DEFAULT_THRESHOLD = 4
DEFAULT_CONFIDENCE = 0.95
# slack for float rounding before an implied FPR counts as infeasible
INFEASIBLE_SLACK = 1e-12


class RiskClass(enum.Enum):
    HIGH = "HighRisk"
    LOW = "LowRisk"


def coarsen(score, threshold=DEFAULT_THRESHOLD):
    """High risk iff ``score > threshold`` (strict)."""
    if not 1 <= score <= 10:
        raise DomainError(f"score {score} outside 1..10")
    return RiskClass.HIGH if score > threshold else RiskClass.LOW


@dataclass(frozen=True)
class ConfusionMatrix:
    tn: int
    fp: int
    fn: int
    tp: int

    def __post_init__(self):
        for name in ("tn", "fp", "fn", "tp"):
            value = getattr(self, name)
            if int(value) != value or value < 0:
                raise DomainError(f"{name} must be a non-negative integer, got {value}")
            object.__setattr__(self, name, int(value))

    @property
    def total(self):
        return self.tn + self.fp + self.fn + self.tp

    @property
    def positives(self):
        return self.fn + self.tp

    @property
    def negatives(self):
        return self.tn + self.fp

    def __add__(self, other):
        return ConfusionMatrix(
            self.tn + other.tn, self.fp + other.fp, self.fn + other.fn, self.tp + other.tp
        )

    def to_dict(self):
        return {"tn": self.tn, "fp": self.fp, "fn": self.fn, "tp": self.tp}


def matrix_from_arrays(scores, outcomes, threshold):
    scores = np.asarray(scores)
    outcomes = np.asarray(outcomes)
    high = scores > threshold
    pos = outcomes == 1
    return ConfusionMatrix(
        tn=int(np.count_nonzero(~high & ~pos)),
        fp=int(np.count_nonzero(high & ~pos)),
        fn=int(np.count_nonzero(~high & pos)),
        tp=int(np.count_nonzero(high & pos)),
    )


def confusion_matrix(d, threshold=DEFAULT_THRESHOLD):
    """Confusion matrix of the coarsened score over every record of ``d``."""
    threshold = check_threshold(threshold)
    if len(d) == 0:
        raise EmptySliceError("cannot build a confusion matrix from an empty dataset")
    return matrix_from_arrays(d.scores, d.outcomes, threshold)


def wilson_interval(successes, trials, level=DEFAULT_CONFIDENCE):
    """Wilson score interval for a binomial proportion."""
    level = check_confidence(level)
    if trials <= 0:
        raise DomainError("Wilson interval needs at least one trial")
    if not 0 <= successes <= trials:
        raise DomainError(f"successes {successes} outside 0..{trials}")
    z = norm.ppf(0.5 + level / 2.0)
    n = float(trials)
    p = successes / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (p + z2 / (2.0 * n)) / denom
    half = z / denom * math.sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n))
    lower = 0.0 if successes == 0 else max(0.0, min(p, center - half))
    upper = 1.0 if successes == trials else min(1.0, max(p, center + half))
    return lower, upper


@dataclass(frozen=True)
class Rate:
    """A proportion with its Wilson interval, or an explicit undefined marker.

    ``value``, ``lower`` and ``upper`` are ``None`` exactly when the
    denominator is zero; ``reason`` then says why.
    """

    numerator: int
    denominator: int
    value: Optional[float]
    lower: Optional[float]
    upper: Optional[float]
    reason: Optional[str] = None

    @classmethod
    def of(cls, numerator, denominator, level=DEFAULT_CONFIDENCE, reason="zero denominator"):
        if denominator == 0:
            return cls(numerator, 0, None, None, None, reason)
        lo, hi = wilson_interval(numerator, denominator, level)
        return cls(numerator, denominator, numerator / denominator, lo, hi)

    @property
    def defined(self):
        return self.value is not None

    def require(self, name="rate"):
        if self.value is None:
            raise UndefinedRateError(f"{name} is undefined: {self.reason}")
        return self.value

    def to_dict(self):
        return {
            "value": self.value,
            "ci_low": self.lower,
            "ci_high": self.upper,
            "numerator": self.numerator,
            "denominator": self.denominator,
            "reason": self.reason,
        }


@dataclass(frozen=True)
class GroupRates:
    prevalence: Rate
    ppv: Rate
    npv: Rate
    fpr: Rate
    fnr: Rate
    n: int
    level: float
    matrix: ConfusionMatrix

    def to_dict(self):
        return {
            "n": self.n,
            "confidence": self.level,
            "matrix": self.matrix.to_dict(),
            "prevalence": self.prevalence.to_dict(),
            "ppv": self.ppv.to_dict(),
            "npv": self.npv.to_dict(),
            "fpr": self.fpr.to_dict(),
            "fnr": self.fnr.to_dict(),
        }


def rates_from_matrix(m, level=DEFAULT_CONFIDENCE):
    """Prevalence, PPV, NPV, FPR and FNR of a confusion matrix."""
    if m.total == 0:
        raise EmptySliceError("confusion matrix is empty")
    return GroupRates(
        prevalence=Rate.of(m.positives, m.total, level),
        ppv=Rate.of(m.tp, m.tp + m.fp, level, "no high-risk classifications"),
        npv=Rate.of(m.tn, m.tn + m.fn, level, "no low-risk classifications"),
        fpr=Rate.of(m.fp, m.negatives, level, "no negatives"),
        fnr=Rate.of(m.fn, m.positives, level, "no positives"),
        n=m.total,
        level=level,
        matrix=m,
    )


def group_rates(d, group, threshold=DEFAULT_THRESHOLD, level=DEFAULT_CONFIDENCE):
    sub = d.take(d.group_mask(group))
    if len(sub) == 0:
        raise EmptySliceError(f"group {group!r} has no records", group=group)
    return rates_from_matrix(confusion_matrix(sub, threshold), level)


def fpr_from_identity(prevalence, ppv, fnr):
    """False positive rate implied by prevalence, PPV and FNR.

    ``FPR = p / (1 - p) * (1 - PPV) / PPV * (1 - FNR)``. The result is not
    clamped; a value above one (beyond rounding) means the inputs cannot come
    from any real confusion matrix and triggers :class:`InfeasibleRateWarning`.
    """
    p = check_fraction(prevalence, "prevalence", open_interval=True)
    ppv = check_fraction(ppv, "ppv", open_interval=True)
    fnr = check_fraction(fnr, "fnr")
    fpr = p / (1.0 - p) * (1.0 - ppv) / ppv * (1.0 - fnr)
    if fpr > 1.0 + INFEASIBLE_SLACK:
        warnings.warn(
            f"implied FPR {fpr:.6g} exceeds 1 for prevalence={p}, ppv={ppv}, fnr={fnr}",
            InfeasibleRateWarning,
            stacklevel=2,
        )
    return fpr


def identity_residual(m):
    """``|FPR_identity - FPR_direct|`` for a matrix, or None where the identity does not apply."""
    if m.total == 0:
        return None
    r = rates_from_matrix(m)
    if not (r.fpr.defined and r.fnr.defined and r.ppv.defined):
        return None
    if not (0.0 < r.prevalence.value < 1.0 and 0.0 < r.ppv.value < 1.0):
        return None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", InfeasibleRateWarning)
        implied = fpr_from_identity(r.prevalence.value, r.ppv.value, r.fnr.value)
    return abs(implied - r.fpr.value)
