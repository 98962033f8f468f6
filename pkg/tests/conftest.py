import pytest

_RESULTS: list[str] = []


class Recorder:
    def __call__(self, criterion: str, ok: bool, detail: str) -> bool:
        line = f"{criterion:<16} {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        _RESULTS.append(line)
        return ok


@pytest.fixture
def record():
    return Recorder()


def pytest_terminal_summary(terminalreporter):
    if _RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in _RESULTS:
            terminalreporter.write_line(line)
