"""Collects acceptance outcomes and prints them, in criterion order, after the run."""

import pytest

ACCEPTANCE: dict[int, list[tuple[bool, str]]] = {}
N_CRITERIA = 10


@pytest.fixture
def record():
    def _record(n: int, ok: bool, detail: str):
        ACCEPTANCE.setdefault(n, []).append((bool(ok), detail))
        return ok

    return _record


def acceptance_lines() -> list[str]:
    lines = []
    for n in range(1, N_CRITERIA + 1):
        parts = ACCEPTANCE.get(n)
        if not parts:
            lines.append(f"criterion {n:2d}: NOT RUN")
            continue
        ok = all(p for p, _ in parts)
        detail = "; ".join(d for _, d in parts)
        lines.append(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    return lines


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in acceptance_lines():
        terminalreporter.write_line(line)
