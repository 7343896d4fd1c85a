import json
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def oracles():
    return json.loads((DATA / "oracles.json").read_text())


# acceptance verdicts, echoed in the terminal summary so they land in test logs
VERDICTS: list[str] = []


@pytest.fixture
def verdict():
    def record(label: str, ok: bool, detail: str) -> bool:
        line = f"{label}: {'PASS' if ok else 'FAIL'} | {detail}"
        VERDICTS.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)
