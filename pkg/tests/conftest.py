ACCEPTANCE = []


def record(number, name, ok, detail=""):
    """Log one acceptance criterion; the line is printed in the session summary."""
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {name}"
    if detail:
        line += f" ({detail})"
    ACCEPTANCE.append((number, line))
    print(line)
    assert ok, line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
