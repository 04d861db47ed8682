import pytest

from helpers import make_record, unit_cost_policy


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(name): headline acceptance guarantee this test verifies"
    )


def pytest_collection_modifyitems(config, items):
    names = {}
    for item in items:
        marker = item.get_closest_marker("criterion")
        if marker:
            names[item.nodeid] = marker.args[0]
    config._criterion_names = names


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Print one [PASS]/[FAIL] line per acceptance criterion that ran."""
    names = getattr(config, "_criterion_names", {})
    if not names:
        return
    outcome = {}
    for status, flag in (("failed", "FAIL"), ("error", "FAIL"), ("passed", "PASS")):
        for report in terminalreporter.stats.get(status, ()):
            outcome.setdefault(report.nodeid, flag)
    lines = [
        f"[{outcome[nodeid]}] {name}" for nodeid, name in names.items() if nodeid in outcome
    ]
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def two_question_logs():
    """The worked two-question example: q1 confident at CB, q2 escalates."""
    return [
        make_record("q1", "cb", [0.9], correct=True),
        make_record("q2", "cb", [0.2], correct=False),
        make_record("q1", "ob1", [0.8], correct=True, n_passages=1),
        make_record("q2", "ob1", [0.7], correct=True, n_passages=1),
    ]


@pytest.fixture
def k1_policy():
    return unit_cost_policy(passages=(1,), thresholds=[0.5])
