import time

import pytest

from apollo.census import count_table, geometric_grid

ACCEPTANCE_LINES = []


def report(ok, label, detail=""):
    """Record one acceptance line; printed again in the terminal summary."""
    tag = "PASS" if ok else "FAIL"
    line = f"{tag:4}  {label}" + (f"  [{detail}]" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def gasket_table():
    """Augmented counts for (-1,2,2,3) on the default grid up to 10**6."""
    t0 = time.perf_counter()
    table = count_table((-1, 2, 2, 3), geometric_grid(100, 1e6))
    table.meta["seconds"] = time.perf_counter() - t0
    return table
