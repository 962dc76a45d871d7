import numpy as np
import pytest

from loglinmle import build_design
from loglinmle.errors import LogLinearError

TREE_A = [[3, 2, 1, 0], [0, 1, 1, 1]]
EX2_A = [[1, 0, 3, 2], [1, 3, 0, 2]]
EX3_D = [[2, 0, 0, -1], [1, -1, -1, 1]]
TREE_D = [[1, -2, 1, 1], [0, 1, -2, 1]]
CLINICAL_Y = [80, 12, 44, 64]
EX2_Y = [1, 2, 3, 4]
# 2x2 table, cells (11, 12, 21, 22): row-1, row-2 and column-1 indicators.
# The column-2 indicator is dropped since it is in the span of the others.
INDEPENDENCE_2X2 = [[1, 1, 0, 0], [0, 0, 1, 1], [1, 0, 1, 0]]


def random_design(rng, max_rows=3, max_cells=6, max_entry=3, rows=None):
    """Rejection-sample a valid design (full row rank, no zero column)."""
    while True:
        J = rows if rows is not None else int(rng.integers(1, max_rows + 1))
        I = int(rng.integers(max(J, 2), max_cells + 1))
        entries = rng.integers(0, max_entry + 1, size=(J, I))
        try:
            return build_design(entries.tolist())
        except LogLinearError:
            continue


def random_designs(n, seed, **kw):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        A = random_design(rng, **kw)
        y = rng.integers(1, 21, size=A.num_cells).astype(float)
        out.append((A, y))
    return out


@pytest.fixture
def ex2():
    return build_design(EX2_A)


@pytest.fixture
def tree():
    return build_design(TREE_A)


# ---------------------------------------------------------------------------
# acceptance criteria report: one line per criterion at the end of the run

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(number, title): acceptance criterion test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.failed):
        prev = _CRITERIA.get(number, (title, True, []))
        notes = prev[2] + list(getattr(item, "criterion_notes", []))
        _CRITERIA[number] = (title, prev[1] and report.passed, notes)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok, notes = _CRITERIA[number]
        terminalreporter.write_line(
            "criterion %d: %s  %s" % (number, "PASS" if ok else "FAIL", title))
        for note in notes:
            terminalreporter.write_line("    " + note)
