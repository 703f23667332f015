ACCEPTANCE_LINES: dict = {}


def record_acceptance(criterion: str, ok: bool, detail: str) -> None:
    """Merge one sub-check into the per-criterion summary line."""
    prev = ACCEPTANCE_LINES.get(criterion)
    if prev is not None:
        ok = ok and prev[0]
        detail = f"{prev[1]}; {detail}"
    ACCEPTANCE_LINES[criterion] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for name, (ok, detail) in ACCEPTANCE_LINES.items():
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
