"""Collects the acceptance verdicts and prints one line per criterion."""

from collections import defaultdict

import pytest

_VERDICTS = defaultdict(list)


@pytest.fixture(scope="session")
def verdict():
    """``verdict(k, label, ok, detail)`` records one checked part of criterion ``k``."""

    def record(k, label, ok, detail):
        ok = bool(ok)
        _VERDICTS[k].append((label, ok, detail))
        print(f"criterion {k} [{label}]: {'PASS' if ok else 'FAIL'} ({detail})")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_VERDICTS):
        parts = _VERDICTS[k]
        status = "PASS" if all(ok for _, ok, _ in parts) else "FAIL"
        detail = "; ".join(f"{label} {'ok' if ok else 'FAILED'}: {d}" for label, ok, d in parts)
        terminalreporter.write_line(f"criterion {k:2d}: {status}  {detail}")
