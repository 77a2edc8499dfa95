import csv

import pytest

from onomastat.corpus import ReferenceDistribution
from onomastat.synthetic import synthetic_reference


@pytest.fixture(scope="session")
def ilan_like():
    return synthetic_reference()


@pytest.fixture
def small_ref():
    return ReferenceDistribution("small", {"A": 10, "B": 10, "C": 1, "D": 1})


@pytest.fixture
def write_csv(tmp_path):
    def _write(name, header, rows):
        path = tmp_path / name
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
        return path

    return _write


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
