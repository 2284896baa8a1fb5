import pytest

VERDICTS: list[str] = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line per acceptance criterion and assert it."""

    def record(number, title, checks):
        ok = all(c[1] for c in checks)
        lines = [f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}"]
        lines += [f"    {'ok  ' if good else 'FAIL'} {label}: {detail}"
                  for label, good, detail in checks]
        VERDICTS.extend(lines)
        print("\n".join(lines))
        failed = [label for label, good, _ in checks if not good]
        assert not failed, f"criterion {number} failed: {failed}"

    return record


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)
