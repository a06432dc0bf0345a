"""Shared fixtures: a registry that reports acceptance outcomes at session end."""

import pytest

_OUTCOMES: dict[str, tuple[bool, str]] = {}


class Ledger:
    """Records one pass/fail line per acceptance criterion."""

    def record(self, name: str, ok: bool, detail: str) -> None:
        _OUTCOMES[name] = (bool(ok), detail)
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")


@pytest.fixture(scope="session")
def acceptance():
    return Ledger()


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_OUTCOMES):
        ok, detail = _OUTCOMES[name]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
