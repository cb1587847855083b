import os
from pathlib import Path

import pytest

from riskaudit.ingest import DEFAULT_GROUPS, filter_cohort, parse_dataset

ROOT = Path(__file__).resolve().parent.parent
DATA_PATH = Path(os.environ.get("RISKAUDIT_DATA", ROOT / "data" / "compas-scores-two-years.csv"))

_acceptance_lines = []


@pytest.fixture(scope="session")
def data_path():
    if not DATA_PATH.is_file():
        pytest.fail(f"two-year dataset missing at {DATA_PATH}; set RISKAUDIT_DATA")
    return DATA_PATH


@pytest.fixture(scope="session")
def full_dataset(data_path):
    return parse_dataset(data_path)


@pytest.fixture(scope="session")
def cohort(full_dataset):
    return filter_cohort(full_dataset, DEFAULT_GROUPS)


@pytest.fixture(scope="session")
def oracle_rows(data_path):
    from oracle import read_rows

    return read_rows(data_path)


@pytest.fixture
def acceptance_log():
    """Collects one pass/fail line per acceptance criterion for the terminal summary."""

    def log(criterion, passed, detail):
        _acceptance_lines.append(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")

    return log


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
