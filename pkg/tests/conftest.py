import pytest

_LINES: list[str] = []
_DETAILS: list[str] = []


class Recorder:
    def line(self, criterion: str, passed: bool, detail: str) -> None:
        _LINES.append(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")

    def detail(self, text: str) -> None:
        _DETAILS.append(text)


@pytest.fixture(scope="session")
def acceptance() -> Recorder:
    return Recorder()


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in _LINES:
        terminalreporter.write_line(line)
    if _DETAILS and terminalreporter.config.getoption("verbose") > 0:
        terminalreporter.section("acceptance per-run records")
        for line in _DETAILS:
            terminalreporter.write_line(line)
