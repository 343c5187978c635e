"""Shared store for the one-line acceptance verdicts printed after the run."""

LINES: dict[int, str] = {}


def record(number: int, ok: bool, title: str, detail: str) -> bool:
    LINES[number] = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} | {detail}"
    return ok
