import pytest

from satedge.config import load_config, preset_path


@pytest.fixture(scope="session")
def desk_config():
    return load_config(preset_path("desk"), environ={})


@pytest.fixture(scope="session")
def desk(desk_config):
    return desk_config.scenario


# one line per acceptance criterion, printed after the run
_CRITERIA: list = []


@pytest.fixture
def criterion():
    def report(number: str, ok: bool, detail: str) -> bool:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        _CRITERIA.append(line)
        print(line)
        return ok
    return report


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.write_sep("=", "acceptance criteria")
        def key(line):
            num = line.split()[1].rstrip(":")
            digits = num.rstrip("abcdefgh")
            return int(digits), num[len(digits):]
        for line in sorted(_CRITERIA, key=key):
            terminalreporter.write_line(line)
