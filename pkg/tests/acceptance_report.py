"""Collects one PASS/FAIL line per acceptance criterion for the terminal summary."""

LINES: list[str] = []


def report(number: int, ok: bool, detail: str) -> bool:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
    print(line)
    LINES.append(line)
    return ok
