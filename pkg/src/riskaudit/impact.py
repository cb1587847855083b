"""Disparate impact of the two-level (MinMax) penalty policy."""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exceptions import ConfigError, EmptySliceError, UndefinedRateError
from .ingest import BLACK, WHITE
from .rates import DEFAULT_THRESHOLD, RiskClass
from .validation import check_threshold


@dataclass(frozen=True)
class PenaltyPolicy:
    """Assign ``t_low`` to low-risk and ``t_high`` to high-risk defendants.

    High risk means a decile score strictly above ``threshold``. Penalties
    are abstract reals.
    """

    t_low: float = 0.0
    t_high: float = 1.0
    threshold: int = DEFAULT_THRESHOLD

    def __post_init__(self):
        object.__setattr__(self, "t_low", float(self.t_low))
        object.__setattr__(self, "t_high", float(self.t_high))
        object.__setattr__(self, "threshold", check_threshold(self.threshold))
        if not self.t_low <= self.t_high:
            raise ConfigError(f"t_low ({self.t_low}) must not exceed t_high ({self.t_high})")

    @property
    def spread(self):
        return self.t_high - self.t_low

    @property
    def exact_spread(self):
        return Fraction(self.t_high) - Fraction(self.t_low)

    def to_dict(self):
        return {"t_low": self.t_low, "t_high": self.t_high, "threshold": self.threshold}


def minmax_penalty(rc, policy):
    return policy.t_high if rc is RiskClass.HIGH else policy.t_low


def penalties(scores, policy):
    """Vectorized policy: penalty for each score in ``scores``."""
    return np.where(np.asarray(scores) > policy.threshold, policy.t_high, policy.t_low)


@dataclass(frozen=True)
class ImpactReport:
    """Expected penalty difference between group b with outcome y1 and group w with outcome y2.

    ``delta_exact`` is the rational value; ``delta`` its nearest float.
    """

    group_b: str
    group_w: str
    y1: int
    y2: int
    policy: PenaltyPolicy
    hr_count_b: int
    n_b: int
    hr_count_w: int
    n_w: int
    delta_exact: Fraction

    @property
    def hr_prob_b(self):
        return self.hr_count_b / self.n_b

    @property
    def hr_prob_w(self):
        return self.hr_count_w / self.n_w

    @property
    def delta(self):
        return float(self.delta_exact)

    def to_dict(self):
        return {
            "group_b": self.group_b,
            "group_w": self.group_w,
            "y1": self.y1,
            "y2": self.y2,
            "policy": self.policy.to_dict(),
            "hr_prob_b": self.hr_prob_b,
            "hr_prob_w": self.hr_prob_w,
            "n_b": self.n_b,
            "n_w": self.n_w,
            "delta": self.delta,
        }


def _hr_count(d, group, outcome, threshold):
    mask = (d.groups == group) & (d.outcomes == outcome)
    n = int(np.count_nonzero(mask))
    if n == 0:
        raise EmptySliceError(
            f"no records with group={group!r} and outcome={outcome}", group=group, outcome=outcome
        )
    return int(np.count_nonzero(d.scores[mask] > threshold)), n


def delta_general(d, policy, y1, y2, group_b=BLACK, group_w=WHITE):
    """Plug-in estimate of ``E[T_{b,y1} - T_{w,y2}]`` under ``policy``.

    Equal to ``(t_high - t_low) * (P(HR | b, y1) - P(HR | w, y2))`` with the
    conditional probabilities replaced by sample frequencies, computed
    exactly in rationals.
    """
    if y1 not in (0, 1) or y2 not in (0, 1):
        raise ConfigError("outcomes must be 0 or 1")
    k_b, n_b = _hr_count(d, group_b, y1, policy.threshold)
    k_w, n_w = _hr_count(d, group_w, y2, policy.threshold)
    delta = policy.exact_spread * (Fraction(k_b, n_b) - Fraction(k_w, n_w))
    return ImpactReport(group_b, group_w, y1, y2, policy, k_b, n_b, k_w, n_w, delta)


def delta_nonrecidivators(rates_b, rates_w, policy):
    """``(t_high - t_low) * (FPR_b - FPR_w)``."""
    return policy.spread * (rates_b.fpr.require("FPR_b") - rates_w.fpr.require("FPR_w"))


def delta_recidivators(rates_b, rates_w, policy):
    """``(t_high - t_low) * (FNR_w - FNR_b)``."""
    return policy.spread * (rates_w.fnr.require("FNR_w") - rates_b.fnr.require("FNR_b"))


def incarceration_ratio(rates_b, rates_w):
    """How many times likelier a non-recidivist in group b is to be classed high risk.

    Under ``t_low = 0, t_high = 1`` this is the relative probability of
    receiving any penalty at all.
    """
    fpr_b = rates_b.fpr.require("FPR_b")
    fpr_w = rates_w.fpr.require("FPR_w")
    if fpr_w == 0.0:
        raise UndefinedRateError("incarceration ratio undefined: FPR_w is zero")
    return fpr_b / fpr_w
