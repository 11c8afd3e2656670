import time
from contextlib import contextmanager

import pytest

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE: dict[int, str] = {}


@contextmanager
def criterion(number: int, title: str, budget: float):
    """Record PASS/FAIL for a criterion: the block must finish without an
    assertion error and within ``budget`` seconds.  ``info`` collects the
    measured values shown on the summary line."""
    info: dict = {"extra_seconds": 0.0}
    start = time.perf_counter()
    ok = False
    try:
        yield info
        ok = True
    finally:
        elapsed = time.perf_counter() - start + info.pop("extra_seconds")
        detail = ", ".join(f"{k}={v}" for k, v in info.items())
        in_time = elapsed <= budget
        status = "PASS" if ok and in_time else "FAIL"
        timing = f"{elapsed:.1f}s / {budget:.0f}s budget" + ("" if in_time else " EXCEEDED")
        ACCEPTANCE[number] = f"criterion {number} {status}: {title} [{timing}] {detail}"
        if ok and not in_time:
            pytest.fail(f"criterion {number} exceeded its {budget:.0f}s runtime budget ({elapsed:.1f}s)")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
