import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from kite_billiards import geometry  # noqa: E402

# every splitting_experiment row produced anywhere in the run, for the
# suite-wide copy-count check in test_acceptance.py
EXPERIMENT_ROWS: list = []


@pytest.fixture(autouse=True, scope="session")
def _record_experiment_rows():
    original = geometry.splitting_experiment

    def recording(*args, **kwargs):
        rows = original(*args, **kwargs)
        EXPERIMENT_ROWS.extend(rows)
        return rows

    geometry.splitting_experiment = recording
    yield
    geometry.splitting_experiment = original


def pytest_collection_modifyitems(items):
    # the suite-wide row check has to see every other test's rows
    last = [it for it in items if it.get_closest_marker("runs_last")]
    rest = [it for it in items if not it.get_closest_marker("runs_last")]
    items[:] = rest + last


def pytest_configure(config):
    config.addinivalue_line("markers", "runs_last: run after every other test")


ACCEPTANCE_LINES: list[str] = []


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    for name, args, _ in getattr(report, "acceptance_marks", ()):
        n, title = args
        status = "PASS" if report.passed else "FAIL"
        ACCEPTANCE_LINES.append(f"criterion {n:>2} {status}  {title} ({report.duration:.1f}s)")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    rep.acceptance_marks = [(m.name, m.args, m.kwargs) for m in item.iter_markers("acceptance")]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
