"""False positive rates stratified by charge degree and prior-record count."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import ConfigError
from .ingest import CHARGE_DEGREES, MISDEMEANOR
from .rates import DEFAULT_CONFIDENCE, DEFAULT_THRESHOLD, Rate, matrix_from_arrays
from .validation import check_confidence, check_threshold


@dataclass(frozen=True)
class PriorBin:
    """Inclusive prior-count range; ``high=None`` is open-ended."""

    low: int
    high: Optional[int]

    @property
    def label(self):
        if self.high is None:
            return f">{self.low - 1}" if self.low > 0 else ">=0"
        if self.high == self.low:
            return str(self.low)
        return f"{self.low}-{self.high}"

    def contains(self, priors):
        priors = np.asarray(priors)
        if self.high is None:
            return priors >= self.low
        return (priors >= self.low) & (priors <= self.high)


DEFAULT_BINS = (PriorBin(0, 0), PriorBin(1, 3), PriorBin(4, 6), PriorBin(7, 10), PriorBin(11, None))


def parse_bins(text):
    """Parse ``"0,1-3,4-6,7-10,11+"`` into prior bins."""
    bins = []
    for part in text.split(","):
        part = part.strip()
        try:
            if part.endswith("+"):
                bins.append(PriorBin(int(part[:-1]), None))
            elif "-" in part:
                lo, hi = part.split("-", 1)
                bins.append(PriorBin(int(lo), int(hi)))
            else:
                bins.append(PriorBin(int(part), int(part)))
        except ValueError:
            raise ConfigError(f"cannot parse prior bin {part!r}") from None
    return validate_bins(bins)


def validate_bins(bins):
    """Bins must be ordered, disjoint, start at zero, leave no gaps, and end open."""
    bins = tuple(bins)
    if not bins:
        raise ConfigError("at least one prior bin is required")
    if bins[0].low != 0:
        raise ConfigError("first prior bin must start at 0")
    for a, b in zip(bins, bins[1:]):
        if a.high is None:
            raise ConfigError("only the last prior bin may be open-ended")
        if a.high < a.low:
            raise ConfigError(f"prior bin {a.label} is empty")
        if b.low <= a.high:
            raise ConfigError(f"prior bins {a.label} and {b.label} overlap or are out of order")
        if b.low != a.high + 1:
            raise ConfigError(f"gap between prior bins {a.label} and {b.label}")
    if bins[-1].high is not None:
        raise ConfigError("last prior bin must be open-ended (catch-all)")
    return bins


@dataclass(frozen=True)
class StratumCell:
    charge_degree: Optional[str]
    prior_bin: PriorBin
    group: str
    fpr: Rate
    n: int
    matrix: object

    def to_dict(self):
        return {
            "charge_degree": self.charge_degree or "all",
            "prior_bin": self.prior_bin.label,
            "group": self.group,
            "n": self.n,
            "negatives": self.matrix.negatives,
            "fpr": self.fpr.to_dict(),
        }


@dataclass(frozen=True)
class StratifiedRates:
    charge_degree: Optional[str]
    bins: tuple
    threshold: int
    level: float
    cells: tuple

    def cell(self, prior_bin, group):
        for c in self.cells:
            if c.prior_bin == prior_bin and c.group == group:
                return c
        raise KeyError((prior_bin, group))

    def to_dict(self):
        return {
            "charge_degree": self.charge_degree or "all",
            "threshold": self.threshold,
            "confidence": self.level,
            "bins": [b.label for b in self.bins],
            "cells": [c.to_dict() for c in self.cells],
        }


def stratified_fpr(
    d,
    degree=MISDEMEANOR,
    bins=DEFAULT_BINS,
    threshold=DEFAULT_THRESHOLD,
    level=DEFAULT_CONFIDENCE,
    groups=None,
):
    """FPR with Wilson interval for each (prior bin, group) cell.

    ``degree`` selects ``"misdemeanor"``, ``"felony"``, or ``None`` for both.
    Cells without non-recidivists carry an undefined rate instead of a number.
    """
    bins = validate_bins(bins)
    threshold = check_threshold(threshold)
    level = check_confidence(level)
    if degree is not None and degree not in CHARGE_DEGREES:
        raise ConfigError(f"charge degree must be one of {CHARGE_DEGREES} or None, got {degree!r}")
    groups = tuple(groups) if groups is not None else d.group_labels()
    base = np.ones(len(d), dtype=bool) if degree is None else d.charge_degrees == degree
    cells = []
    for b in bins:
        in_bin = base & b.contains(d.priors)
        for g in groups:
            mask = in_bin & (d.groups == g)
            m = matrix_from_arrays(d.scores[mask], d.outcomes[mask], threshold)
            reason = "empty cell" if m.total == 0 else "no negatives"
            cells.append(StratumCell(degree, b, g, Rate.of(m.fp, m.negatives, level, reason), m.total, m))
    return StratifiedRates(degree, bins, threshold, level, tuple(cells))
