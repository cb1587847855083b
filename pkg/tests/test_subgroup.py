import numpy as np
import pytest

from riskaudit.exceptions import ConfigError
from riskaudit.ingest import BLACK, FELONY, MISDEMEANOR, WHITE, Dataset
from riskaudit.rates import confusion_matrix, group_rates
from riskaudit.subgroup import DEFAULT_BINS, PriorBin, parse_bins, stratified_fpr, validate_bins


def make(rows):
    # rows: (group, score, outcome, degree, priors)
    g, s, y, deg, p = zip(*rows)
    return Dataset([str(i) for i in range(len(rows))], g, s, y, deg, p)


def test_parse_default_bins():
    assert parse_bins("0,1-3,4-6,7-10,11+") == DEFAULT_BINS
    assert [b.label for b in DEFAULT_BINS] == ["0", "1-3", "4-6", "7-10", ">10"]


@pytest.mark.parametrize("text", ["1-3,4+", "0,2+", "0,0-3,4+", "0,1-3", "0,a+", "0,1+,5+"])
def test_bad_bins_rejected(text):
    with pytest.raises(ConfigError):
        parse_bins(text)


def test_empty_bin_list_rejected():
    with pytest.raises(ConfigError):
        validate_bins([])


def test_single_bin_reduces_to_cohort_fpr(cohort):
    strat = stratified_fpr(cohort, degree=None, bins=[PriorBin(0, None)])
    for g in (BLACK, WHITE):
        assert strat.cell(PriorBin(0, None), g).fpr.value == group_rates(cohort, g).fpr.value


def test_zero_negative_cell_is_undefined():
    d = make([("b", 6, 1, MISDEMEANOR, 0), ("b", 6, 0, MISDEMEANOR, 2), ("w", 2, 0, MISDEMEANOR, 0)])
    strat = stratified_fpr(d, groups=("b", "w"))
    cell = strat.cell(PriorBin(0, 0), "b")
    assert not cell.fpr.defined and cell.fpr.reason == "no negatives"
    empty = strat.cell(PriorBin(11, None), "w")
    assert empty.n == 0 and empty.fpr.reason == "empty cell"
    assert strat.cell(PriorBin(1, 3), "b").fpr.value == 1.0


def test_degree_validation(cohort):
    with pytest.raises(ConfigError):
        stratified_fpr(cohort, degree="violation")


def test_cells_sum_to_unstratified(cohort):
    strat = stratified_fpr(cohort)
    misd = cohort.take(cohort.charge_degrees == MISDEMEANOR)
    for g in (BLACK, WHITE):
        total = sum((strat.cell(b, g).matrix for b in DEFAULT_BINS[1:]), strat.cell(DEFAULT_BINS[0], g).matrix)
        assert total == confusion_matrix(misd.take(misd.groups == g), 4)


def test_merging_bins_adds_cells(cohort):
    fine = stratified_fpr(cohort, degree=FELONY)
    coarse = stratified_fpr(cohort, degree=FELONY, bins=parse_bins("0,1-6,7+"))
    for g in (BLACK, WHITE):
        merged = fine.cell(PriorBin(1, 3), g).matrix + fine.cell(PriorBin(4, 6), g).matrix
        assert coarse.cell(PriorBin(1, 6), g).matrix == merged
        merged = fine.cell(PriorBin(7, 10), g).matrix + fine.cell(PriorBin(11, None), g).matrix
        assert coarse.cell(PriorBin(7, None), g).matrix == merged


def test_real_cells_match_oracle(cohort, oracle_rows):
    from oracle import stratified_fpr as oracle_fpr

    for degree, code in ((MISDEMEANOR, "M"), (FELONY, "F")):
        strat = stratified_fpr(cohort, degree=degree)
        for b in DEFAULT_BINS:
            for g in (BLACK, WHITE):
                expected, negatives = oracle_fpr(oracle_rows[0], g, code, b.low, b.high)
                cell = strat.cell(b, g)
                assert cell.matrix.negatives == negatives
                assert cell.fpr.value == (None if expected is None else float(expected))


def test_wilson_interval_brackets_each_cell(cohort):
    for c in stratified_fpr(cohort).cells:
        if c.fpr.defined:
            assert 0 <= c.fpr.lower <= c.fpr.value <= c.fpr.upper <= 1


def test_to_dict_layout(cohort):
    out = stratified_fpr(cohort).to_dict()
    assert out["bins"] == ["0", "1-3", "4-6", "7-10", ">10"]
    assert len(out["cells"]) == 10
    assert np.all([c["charge_degree"] == "misdemeanor" for c in out["cells"]])
