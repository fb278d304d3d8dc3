from __future__ import annotations

ACCEPTANCE: dict = {}


def record(number: int, ok: bool, message: str) -> None:
    """Store one acceptance verdict; later calls for the same criterion can only turn it red."""
    prev = ACCEPTANCE.get(number)
    if prev is not None:
        ok = ok and prev[0]
        message = f"{prev[1]}; {message}"
    ACCEPTANCE[number] = (ok, message)
    print(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {message}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, message = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {message}")
