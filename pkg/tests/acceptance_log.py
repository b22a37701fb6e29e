"""Collects one PASS/FAIL line per acceptance check for the terminal summary."""

LINES = []


def record(number: int, label: str, ok: bool, detail: str = "") -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {label}"
    if detail:
        line += f" ({detail})"
    LINES.append(line)
    print(line)
