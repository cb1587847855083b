"""Score-distribution effect sizes and the non-overlap bound on disparate impact."""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import DomainError, EmptySliceError
from .impact import delta_general
from .ingest import BLACK, WHITE
from .validation import DECILES

ANY = None


@dataclass(frozen=True)
class ScoreDistribution:
    """Normalized decile histogram for a group, optionally conditioned on outcome.

    ``mass[i]`` is the share of the slice with score ``i + 1``.
    """

    group: str
    outcome: Optional[int]
    mass: tuple
    counts: tuple
    n: int

    def as_array(self):
        return np.asarray(self.mass, dtype=float)

    def to_dict(self):
        return {
            "group": self.group,
            "outcome": "any" if self.outcome is None else self.outcome,
            "n": self.n,
            "mass": list(self.mass),
            "counts": list(self.counts),
        }


def _slice_mask(d, group, outcome):
    mask = d.groups == group
    if outcome is not None:
        mask = mask & (d.outcomes == outcome)
    return mask


def score_histogram(d, group, outcome=ANY):
    """Decile masses of the ``(group, outcome)`` slice; ``outcome=None`` means any outcome."""
    mask = _slice_mask(d, group, outcome)
    n = int(np.count_nonzero(mask))
    if n == 0:
        raise EmptySliceError(f"no records with group={group!r}, outcome={outcome}", group=group, outcome=outcome)
    counts = np.bincount(d.scores[mask], minlength=11)[1:]
    return ScoreDistribution(group, outcome, tuple(float(c) / n for c in counts), tuple(int(c) for c in counts), n)


def cohens_d(scores_a, scores_b):
    """Standardized mean difference ``(mean_a - mean_b) / pooled_sd``.

    The pooled SD uses ``n_a + n_b - 2`` degrees of freedom.
    """
    a = np.asarray(scores_a, dtype=float)
    b = np.asarray(scores_b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise DomainError("Cohen's d needs at least two observations per sample")
    ss = ((a - a.mean()) ** 2).sum() + ((b - b.mean()) ** 2).sum()
    pooled = math.sqrt(ss / (a.size + b.size - 2))
    if pooled == 0.0:
        raise DomainError("pooled standard deviation is zero (constant scores)")
    return float((a.mean() - b.mean()) / pooled)


def tv_distance(p, q):
    """Total variation distance, half the L1 distance between two mass vectors."""
    if isinstance(p, ScoreDistribution):
        p = p.mass
    if isinstance(q, ScoreDistribution):
        q = q.mass
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape or p.ndim != 1:
        raise DomainError(f"distributions have mismatched support: {p.shape} vs {q.shape}")
    return float(min(1.0, 0.5 * np.abs(p - q).sum()))


def max_threshold_gap(p, q):
    """Largest ``|P_p(S > t) - P_q(S > t)|`` over single-cut thresholds ``t = 0..10``.

    Returns ``(gap, threshold)``.
    """
    p = np.asarray(p.mass if isinstance(p, ScoreDistribution) else p, dtype=float)
    q = np.asarray(q.mass if isinstance(q, ScoreDistribution) else q, dtype=float)
    best, best_t = 0.0, 0
    for t in range(0, len(DECILES) + 1):
        gap = abs(p[t:].sum() - q[t:].sum())
        if gap > best:
            best, best_t = gap, t
    return best, best_t


@dataclass(frozen=True)
class EffectSizeReport:
    outcome: Optional[int]
    cohens_d: Optional[float]
    tv_distance: float
    bound: float
    measured_delta: Optional[float]
    policy: Optional[object] = None

    @property
    def bound_holds(self):
        return self.measured_delta is None or self.measured_delta <= self.bound + 1e-12

    def to_dict(self):
        return {
            "outcome": "any" if self.outcome is None else self.outcome,
            "cohens_d": self.cohens_d,
            "tv_distance": self.tv_distance,
            "bound": self.bound,
            "measured_delta": self.measured_delta,
            "bound_holds": self.bound_holds,
            "policy": None if self.policy is None else self.policy.to_dict(),
        }


def _maybe_d(d, mask_a, mask_b):
    try:
        return cohens_d(d.scores[mask_a], d.scores[mask_b])
    except DomainError:
        return None


def overall_effect_sizes(d, group_b=BLACK, group_w=WHITE):
    """Cohen's d and TV distance on the full (any-outcome) group histograms."""
    f_b = score_histogram(d, group_b)
    f_w = score_histogram(d, group_w)
    dval = _maybe_d(d, d.groups == group_b, d.groups == group_w)
    tv = tv_distance(f_b, f_w)
    return EffectSizeReport(None, dval, tv, tv, None)


def overlap_bound_check(d, policy, outcome, group_b=BLACK, group_w=WHITE):
    """Measured delta at ``y1 = y2 = outcome`` against ``(t_high - t_low) * d_TV(f_b,y, f_w,y)``."""
    f_b = score_histogram(d, group_b, outcome)
    f_w = score_histogram(d, group_w, outcome)
    tv = tv_distance(f_b, f_w)
    delta = delta_general(d, policy, outcome, outcome, group_b, group_w).delta
    dval = _maybe_d(d, _slice_mask(d, group_b, outcome), _slice_mask(d, group_w, outcome))
    return EffectSizeReport(outcome, dval, tv, policy.spread * tv, delta, policy)
