import pytest

from staticlab.catalog import build_entry, entry_ids

_ENTRIES = {}
ACCEPTANCE_RESULTS = {}


def get_entry(entry_id):
    """Build each catalog entry once per session."""
    if entry_id not in _ENTRIES:
        _ENTRIES[entry_id] = build_entry(entry_id)
    return _ENTRIES[entry_id]


@pytest.fixture(scope="session")
def catalog():
    return {eid: get_entry(eid) for eid in entry_ids()}


@pytest.fixture
def record_acceptance(request):
    """Record the outcome of an acceptance criterion under ``name``."""
    names = []

    def _record(name):
        names.append(name)

    yield _record
    rep = getattr(request.node, "rep_call", None)
    ok = rep is not None and not rep.failed
    for name in names:
        ACCEPTANCE_RESULTS[name] = ACCEPTANCE_RESULTS.get(name, True) and ok


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE_RESULTS, key=lambda n: int(n.split(":")[0])):
        status = "PASS" if ACCEPTANCE_RESULTS[name] else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {name}")
