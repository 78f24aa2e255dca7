import pytest

from quasipoisson.cli import load_algebra


@pytest.fixture(scope="session")
def bundled():
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = load_algebra(name)
        return cache[name]

    return get


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[0][1:])):
            terminalreporter.write_line(line)
