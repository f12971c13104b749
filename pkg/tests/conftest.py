import pytest

# acceptance verdicts, printed once at the end of the run
VERDICTS: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def verdict():
    def record(criterion: str, passed: bool, detail: str):
        VERDICTS[criterion] = (passed, detail)
        print(f"{criterion}: {'PASS' if passed else 'FAIL'} - {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(VERDICTS, key=lambda c: int(c.split()[1])):
        passed, detail = VERDICTS[criterion]
        terminalreporter.write_line(f"{criterion}: {'PASS' if passed else 'FAIL'} - {detail}")
