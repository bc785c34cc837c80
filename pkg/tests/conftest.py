import pytest

from wordrev import corpus

# filled by test_acceptance; printed at the end of the run
ACCEPTANCE = {}


@pytest.fixture(scope="session")
def pres():
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = corpus.load_entry(name).presentation
        return cache[name]

    return get


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
