"""Shared state for the acceptance summary."""

LINES: list[str] = []
DRIFTS: dict[str, float] = {}


def record(tag: str, ok: bool, detail: str) -> None:
    LINES.append(f"{tag:<5} {'PASS' if ok else 'FAIL'}  {detail}")
