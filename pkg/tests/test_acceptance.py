"""Acceptance suite: one test per criterion, each logging a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v`` and read the "acceptance criteria"
section of the terminal summary.
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from riskaudit.cli import main
from riskaudit.effectsize import overall_effect_sizes, overlap_bound_check, score_histogram, tv_distance
from riskaudit.fairness import calibration_curve
from riskaudit.impact import PenaltyPolicy, delta_general, delta_nonrecidivators, delta_recidivators
from riskaudit.ingest import BLACK, FELONY, MISDEMEANOR, WHITE, Dataset
from riskaudit.rates import ConfusionMatrix, fpr_from_identity, group_rates, matrix_from_arrays, rates_from_matrix
from riskaudit.report import figure_rows
from riskaudit.simulate import SimConfig, generate_population
from riskaudit.subgroup import DEFAULT_BINS, stratified_fpr

PUBLISHED = {
    BLACK: {"fpr": 0.45, "fnr": 0.28, "prevalence": 0.51},
    WHITE: {"fpr": 0.23, "fnr": 0.48, "prevalence": 0.39},
}


def test_c1_published_error_rates(cohort, acceptance_log):
    got = {g: group_rates(cohort, g, 4) for g in (BLACK, WHITE)}
    errs = {(g, k): abs(getattr(got[g], k).value - PUBLISHED[g][k]) for g in got for k in ("fpr", "fnr")}
    ok = all(e <= 0.02 for e in errs.values())
    sens = "; ".join(
        f"t={t}: " + ", ".join(f"{g[:5]} fpr={r.fpr.value:.3f} fnr={r.fnr.value:.3f}"
                               for g, r in ((g, group_rates(cohort, g, t)) for g in (BLACK, WHITE)))
        for t in (3, 4, 5))
    acceptance_log("1 published FPR/FNR (+-0.02)", ok,
                   ", ".join(f"{g[:5]} {k}={getattr(got[g], k).value:.4f}" for g, k in errs) + f" | {sens}")
    assert ok, errs


def test_c2_prevalence(cohort, acceptance_log):
    got = {g: group_rates(cohort, g).prevalence.value for g in (BLACK, WHITE)}
    ok = all(abs(got[g] - PUBLISHED[g]["prevalence"]) <= 0.02 for g in got)
    acceptance_log("2 prevalence (+-0.02)", ok, ", ".join(f"{g}={v:.4f}" for g, v in got.items()))
    assert ok, got


def test_c3_effect_sizes(cohort, acceptance_log):
    rep = overall_effect_sizes(cohort)
    ok = abs(rep.cohens_d - 0.60) <= 0.02 and abs(rep.tv_distance - 0.245) <= 0.01
    acceptance_log("3 Cohen's d (+-0.02) and TV (+-0.01)", ok, f"d={rep.cohens_d:.4f}, tv={rep.tv_distance:.4f}")
    assert ok


def _identity_error(m):
    """|identity - direct FPR|, or None outside the identity's domain (prevalence or PPV in {0, 1}, or undefined)."""
    if m.total == 0 or m.negatives == 0 or m.positives == 0 or m.tp == 0 or m.fp == 0:
        return None
    r = rates_from_matrix(m)
    return abs(fpr_from_identity(r.prevalence.value, r.ppv.value, r.fnr.value) - m.fp / m.negatives)


def test_c4_identity_closure(full_dataset, acceptance_log):
    worst_real, n_real = 0.0, 0
    for g in full_dataset.group_labels():
        mask = full_dataset.groups == g
        for t in range(0, 11):
            err = _identity_error(matrix_from_arrays(full_dataset.scores[mask], full_dataset.outcomes[mask], t))
            if err is not None:
                worst_real, n_real = max(worst_real, err), n_real + 1
    rng = np.random.default_rng(20240601)
    worst_rand, n_rand = 0.0, 0
    while n_rand < 10_000:
        err = _identity_error(ConfusionMatrix(*(int(v) for v in rng.integers(0, 1001, size=4))))
        if err is not None:
            worst_rand, n_rand = max(worst_rand, err), n_rand + 1
    ok = worst_real <= 1e-12 and worst_rand <= 1e-12 and n_real > 0
    acceptance_log("4 FPR identity (1e-12)", ok,
                   f"{n_real} real slices max={worst_real:.2e}; {n_rand} random max={worst_rand:.2e}")
    assert ok


def _brute_force(groups, scores, outcomes, policy, y1, y2, b, w):
    def mean(g, y):
        total, n = Fraction(0), 0
        for gi, si, yi in zip(groups, scores, outcomes):
            if gi == g and yi == y:
                total += Fraction(policy.t_high if si > policy.threshold else policy.t_low)
                n += 1
        return total / n

    return mean(b, y1) - mean(w, y2)


def _synthetic(rng):
    n = int(rng.integers(50, 500))
    groups = np.where(rng.random(n) < rng.uniform(0.2, 0.8), "b", "w")
    groups[:4] = ["b", "b", "w", "w"]
    outcomes = (rng.random(n) < rng.uniform(0.2, 0.8)).astype(int)
    outcomes[:4] = [0, 1, 0, 1]
    scores = rng.integers(1, 11, size=n)
    return Dataset(np.arange(n).astype(str), groups, scores, outcomes, [FELONY] * n, np.zeros(n, dtype=int))


def _error_rate_form_check(d, policy, b, w):
    """Worst error-rate-form mismatch and whether every general delta equals the brute force exactly."""
    rb, rw = group_rates(d, b, policy.threshold), group_rates(d, w, policy.threshold)
    worst = max(abs(delta_nonrecidivators(rb, rw, policy) - delta_general(d, policy, 0, 0, b, w).delta),
                abs(delta_recidivators(rb, rw, policy) - delta_general(d, policy, 1, 1, b, w).delta))
    groups, scores, outcomes = d.groups.tolist(), d.scores.tolist(), d.outcomes.tolist()
    exact = all(
        delta_general(d, policy, y1, y2, b, w).delta_exact == _brute_force(groups, scores, outcomes, policy, y1, y2, b, w)
        for y1 in (0, 1) for y2 in (0, 1))
    return worst, exact


def test_c5_error_rate_forms(cohort, acceptance_log):
    worst, exact = _error_rate_form_check(cohort, PenaltyPolicy(0, 1, 4), BLACK, WHITE)
    rng = np.random.default_rng(5)
    for _ in range(100):
        t_low = float(rng.uniform(-3, 3))
        pol = PenaltyPolicy(t_low, t_low + float(rng.uniform(0, 4)), int(rng.integers(0, 11)))
        w_i, e_i = _error_rate_form_check(_synthetic(rng), pol, "b", "w")
        worst, exact = max(worst, w_i), exact and e_i
    ok = worst <= 1e-12 and exact
    acceptance_log("5 error-rate forms (1e-12) and exact brute force", ok,
                   f"real + 100 synthetic: max diff={worst:.2e}, brute force exact={exact}")
    assert ok


def _bound_slack(d, b, w, policies):
    worst = -math.inf
    for pol in policies:
        for y in (0, 1):
            rep = overlap_bound_check(d, pol, y, b, w)
            worst = max(worst, abs(rep.measured_delta) - rep.bound)
    return worst


def test_c6_overlap_bound(cohort, acceptance_log):
    spreads = [(0, 1), (-1, 2.5)]
    policies = [PenaltyPolicy(lo, hi, t) for t in range(0, 11) for lo, hi in spreads]
    worst = _bound_slack(cohort, BLACK, WHITE, policies)
    rng = np.random.default_rng(6)
    for _ in range(50):
        worst = max(worst, _bound_slack(_synthetic(rng), "b", "w", policies))
    witness = Dataset(np.arange(8).astype(str), ["b"] * 4 + ["w"] * 4, [3, 7, 7, 7, 3, 3, 3, 7], [0] * 8,
                      [FELONY] * 8, np.zeros(8, dtype=int))
    gaps = [abs(r.measured_delta - r.bound) for r in
            (overlap_bound_check(witness, PenaltyPolicy(0, 1, t), 0, "b", "w") for t in (3, 4, 5, 6))]
    ok = worst <= 1e-12 and max(gaps) <= 1e-12
    acceptance_log("6 delta <= spread*TV (1e-12) and tight witness", ok,
                   f"max(|delta|-bound)={worst:.3e} over real+50 synthetic; witness |delta-bound| max={max(gaps):.1e}")
    assert ok


def test_c7_simulated_impossibility(acceptance_log):
    cfg = SimConfig(prevalence=(0.51, 0.39), n_per_group=(100_000, 100_000), seed=0)
    pop = generate_population(cfg)
    b, w = cfg.groups
    worst_z = 0.0
    for s in range(1, 11):
        cells = []
        for g in (b, w):
            y = pop.outcomes[(pop.groups == g) & (pop.scores == s)]
            cells.append((y.mean(), y.mean() * (1 - y.mean()) / y.size))
        se = math.sqrt(cells[0][1] + cells[1][1])
        worst_z = max(worst_z, abs(cells[0][0] - cells[1][0]) / se if se > 0 else 0.0)
    gaps = {t: group_rates(pop, b, t).fpr.value - group_rates(pop, w, t).fpr.value for t in range(0, 11)}
    # t=0 and t=10 are constant classifiers (everyone high / everyone low), so FPR is 1 or 0 in both groups
    informative = all(gaps[t] > 0 for t in range(1, 10))
    trivial = gaps[0] == 0.0 and gaps[10] == 0.0
    ok = worst_z <= 3 and informative and trivial
    acceptance_log("7 simulation: calibrated (3 SE) yet FPR_b > FPR_w", ok,
                   f"max calib z={worst_z:.2f}; FPR gap t=1..9 min={min(gaps[t] for t in range(1, 10)):.4f}; "
                   f"t=0,10 gaps={gaps[0]},{gaps[10]} (constant classifiers)")
    assert ok


def test_c8_figures(cohort, oracle_rows, acceptance_log):
    from oracle import decile_proportions
    from oracle import stratified_fpr as oracle_stratified

    rows = oracle_rows[0]
    fig1 = figure_rows(cohort, 1, BLACK, WHITE, 0.95)
    fig1_ok = all(r["y"] == float(decile_proportions(rows, r["series"])[0][r["x"]]) for r in fig1) and len(fig1) == 20
    strat = stratified_fpr(cohort, MISDEMEANOR, DEFAULT_BINS, groups=(BLACK, WHITE))
    fig2 = figure_rows(cohort, 2, BLACK, WHITE, 0.95, strat)
    fig2_ok = True
    for r, cell in zip(fig2, strat.cells):
        expected, negatives = oracle_stratified(rows, r["series"], "M", cell.prior_bin.low, cell.prior_bin.high)
        fig2_ok &= r["n"] == negatives and r["y"] == (None if expected is None else float(expected))
    sign = []
    for b in DEFAULT_BINS:
        fb, fw = strat.cell(b, BLACK).fpr, strat.cell(b, WHITE).fpr
        if fb.defined and fw.defined:
            sign.append((b.label, fb.value > fw.value))
    sign_ok = bool(sign) and all(v for _, v in sign)
    ok = fig1_ok and fig2_ok and sign_ok
    acceptance_log("8 figures 1-2 match oracle; Black FPR > White FPR per bin", ok,
                   f"fig1 exact={fig1_ok}, fig2 exact={fig2_ok}, bins b>w: "
                   + ", ".join(f"{label}={v}" for label, v in sign))
    assert ok


def test_c9_determinism(data_path, tmp_path, capsys, acceptance_log):
    outs = []
    for i in range(2):
        sim, audit = tmp_path / f"sim{i}.json", tmp_path / f"audit{i}.json"
        assert main(["simulate", "--seed", "11", "--out", str(sim)]) == 0
        assert main(["audit", "--data", str(data_path), "--deterministic", "--out", str(audit)]) == 0
        outs.append((sim.read_bytes(), audit.read_bytes()))
    capsys.readouterr()
    ok = outs[0][0] == outs[1][0] and outs[0][1] == outs[1][1]
    acceptance_log("9 determinism (simulate, audit)", ok,
                   f"simulate identical={outs[0][0] == outs[1][0]}, audit identical={outs[0][1] == outs[1][1]}")
    assert ok
