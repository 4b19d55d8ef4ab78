"""Collects acceptance verdicts and prints one pass/fail line per criterion."""
from collections import defaultdict

import pytest

_RESULTS = defaultdict(list)  # criterion number -> [(label, passed, detail)]
CRITERIA = {
    1: "oracle equivalence on small instances",
    2: "Poisson limit of n-K at n=2000, d=22",
    3: "spatial law of non-Pareto points",
    4: "layer-count limits via quadrature",
    5: "layer-count mean by Monte Carlo at n=2000, d=20",
    6: "phase-transition sweep over d=16..28",
    7: "determinism across worker counts",
    8: "poissonized sample size",
}


@pytest.fixture(scope="session")
def acceptance():
    def record(criterion: int, label: str, passed: bool, detail: str) -> None:
        _RESULTS[criterion].append((label, bool(passed), detail))
        print(f"\n[{'PASS' if passed else 'FAIL'}] criterion {label}: {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number, title in CRITERIA.items():
        parts = _RESULTS.get(number)
        if not parts:
            tr.write_line(f"FAIL  criterion {number} ({title}): not evaluated")
            continue
        ok = all(p for _, p, _ in parts)
        tr.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {number} ({title})")
        for label, passed, detail in parts:
            tr.write_line(f"        {'pass' if passed else 'FAIL'}  {label}: {detail}")
