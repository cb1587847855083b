"""Assembling audit results into plain, deterministic JSON-ready structures and tables."""

import csv
import io
import json
import math
import os
import tempfile
from fractions import Fraction

import numpy as np

from . import __version__
from .effectsize import overall_effect_sizes, overlap_bound_check, score_histogram
from .exceptions import UndefinedRateError
from .fairness import calibration_curve, test_fairness_report
from .impact import (
    delta_general,
    delta_nonrecidivators,
    delta_recidivators,
    incarceration_ratio,
)
from .rates import group_rates

SIG_DIGITS = 9
TOOL = "riskaudit"


def fmt_float(x):
    return float(f"{x:.{SIG_DIGITS}g}")


def clean(obj):
    """Recursively convert to JSON types, rounding floats to 9 significant digits."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating, Fraction)):
        x = float(obj)
        if math.isnan(x) or math.isinf(x):
            return None
        return fmt_float(x)
    return obj


def dumps(obj):
    return json.dumps(clean(obj), indent=2, ensure_ascii=False) + "\n"


def fmt_cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating, Fraction)):
        return f"{float(value):.{SIG_DIGITS}g}"
    return str(value)


def table_to_csv(columns, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def write_atomic(path, text):
    """Write ``text`` to ``path`` via a temporary file in the same directory and a rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _optional(fn, *args):
    try:
        return fn(*args)
    except UndefinedRateError:
        return None


def rates_section(d, groups, threshold, level):
    return {g: group_rates(d, g, threshold, level).to_dict() for g in groups}


def sensitivity_section(d, groups, thresholds, level):
    out = {}
    for t in thresholds:
        out[str(t)] = {}
        for g in groups:
            r = group_rates(d, g, t, level)
            out[str(t)][g] = {
                "prevalence": r.prevalence.value,
                "ppv": r.ppv.value,
                "fpr": r.fpr.value,
                "fnr": r.fnr.value,
            }
    return out


def calibration_section(d, group_b, group_w, level, min_n):
    curve_b = calibration_curve(d, group_b, level)
    curve_w = calibration_curve(d, group_w, level)
    return {
        "curves": {group_b: curve_b.to_dict(), group_w: curve_w.to_dict()},
        "report": test_fairness_report(curve_b, curve_w, min_n).to_dict(),
    }


def impact_section(d, policy, group_b, group_w, level, extra_pairs=()):
    rb = group_rates(d, group_b, policy.threshold, level)
    rw = group_rates(d, group_w, policy.threshold, level)
    non = delta_general(d, policy, 0, 0, group_b, group_w)
    rec = delta_general(d, policy, 1, 1, group_b, group_w)
    out = {
        "policy": policy.to_dict(),
        "nonrecidivators": {
            "general": non.to_dict(),
            "from_error_rates": _optional(delta_nonrecidivators, rb, rw, policy),
        },
        "recidivators": {
            "general": rec.to_dict(),
            "from_error_rates": _optional(delta_recidivators, rb, rw, policy),
        },
        "incarceration_ratio": _optional(incarceration_ratio, rb, rw),
    }
    if extra_pairs:
        out["pairs"] = [delta_general(d, policy, y1, y2, group_b, group_w).to_dict() for y1, y2 in extra_pairs]
    return out


def effect_size_section(d, policy, group_b, group_w):
    return {
        "overall": overall_effect_sizes(d, group_b, group_w).to_dict(),
        "by_outcome": {str(y): overlap_bound_check(d, policy, y, group_b, group_w).to_dict() for y in (0, 1)},
    }


def figure_rows(d, figure, group_b, group_w, level, stratified=None):
    """Long-format rows ``(series, x, y, ci_low, ci_high, n)`` for a figure."""
    rows = []
    if figure == 1:
        for g in (group_b, group_w):
            for p in calibration_curve(d, g, level).points:
                rows.append({"series": g, "x": p.score, "y": p.rate.value,
                             "ci_low": p.rate.lower, "ci_high": p.rate.upper, "n": p.n})
    elif figure == 2:
        for c in stratified.cells:
            rows.append({"series": c.group, "x": c.prior_bin.label, "y": c.fpr.value,
                         "ci_low": c.fpr.lower, "ci_high": c.fpr.upper, "n": c.fpr.denominator})
    elif figure == 3:
        for g in (group_b, group_w):
            h = score_histogram(d, g)
            for s, (m, c) in enumerate(zip(h.mass, h.counts), start=1):
                rows.append({"series": g, "x": s, "y": m, "ci_low": None, "ci_high": None, "n": c})
    else:
        raise ValueError(f"unknown figure {figure}")
    return rows


FIGURE_COLUMNS = ("series", "x", "y", "ci_low", "ci_high", "n")


def metadata(**fields):
    return {"tool": TOOL, "version": __version__, **fields}
