"""Shared fixtures. ``criterion`` records acceptance outcomes, which are
echoed as one PASS/FAIL line per criterion at the end of the run."""

from collections import OrderedDict

import pytest

_RESULTS: "OrderedDict[str, list[tuple[bool, str]]]" = OrderedDict()


@pytest.fixture
def criterion():
    def record(cid: str, ok: bool, detail: str) -> bool:
        ok = bool(ok)
        _RESULTS.setdefault(cid, []).append((ok, detail))
        print(f"{'PASS' if ok else 'FAIL'} {cid}: {detail}")
        return ok

    return record


def acceptance_lines() -> list[str]:
    lines = []
    for cid, parts in _RESULTS.items():
        ok = all(p for p, _ in parts)
        lines.append(f"{'PASS' if ok else 'FAIL'} {cid}: " + "; ".join(d for _, d in parts))
    return lines


def pytest_terminal_summary(terminalreporter):
    lines = acceptance_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
