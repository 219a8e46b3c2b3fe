import pytest


class AcceptanceLedger:
    """Collects sub-check outcomes so each criterion prints one summary line."""

    def __init__(self):
        self.results = {}

    def check(self, criterion, label, ok, detail=""):
        self.results.setdefault(criterion, []).append((label, bool(ok), detail))
        status = "PASS" if ok else "FAIL"
        print(f"[criterion {criterion:>2}] {status} {label}: {detail}")
        return bool(ok)

    def lines(self):
        for n in sorted(self.results):
            parts = self.results[n]
            ok = all(p[1] for p in parts)
            desc = "; ".join(f"{label} {'ok' if good else 'FAILED'} ({detail})" for label, good, detail in parts)
            yield f"{'PASS' if ok else 'FAIL'}  criterion {n:>2}: {desc}"


_LEDGER = AcceptanceLedger()


@pytest.fixture(scope="session")
def acceptance():
    return _LEDGER


def pytest_terminal_summary(terminalreporter):
    lines = list(_LEDGER.lines())
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)
