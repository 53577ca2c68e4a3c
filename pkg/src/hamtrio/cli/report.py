"""Machine-readable reports (schema hamtrio-report/1)."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Optional

SCHEMA = "hamtrio-report/1"
MAX_RESIDUAL_CHARS = 400


def truncate(text: str, limit: int = MAX_RESIDUAL_CHARS) -> str:
    text = str(text)
    return text if len(text) <= limit else text[: limit - 3] + "..."


@dataclass
class Item:
    name: str
    ok: bool
    detail: str = ""


@dataclass
class Report:
    command: str
    inputs: dict = field(default_factory=dict)
    items: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    results: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    seed: Optional[int] = None
    timings: dict = field(default_factory=dict)

    def check(self, name: str, ok: bool, detail: str = "") -> bool:
        self.items.append(Item(name, bool(ok), truncate(detail)))
        return bool(ok)

    def residual(self, expr) -> None:
        self.residuals.append(truncate(expr))

    @property
    def ok(self) -> bool:
        return all(i.ok for i in self.items)

    @property
    def verdict(self) -> str:
        return "pass" if self.ok else "fail"

    def as_dict(self) -> dict:
        d = asdict(self)
        d = {"schema": SCHEMA, "command": self.command, "verdict": self.verdict, **{
            k: v for k, v in d.items() if k != "command"}}
        return d

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, default=str)

    def to_text(self) -> str:
        lines = [f"{self.command}: {self.verdict.upper()}"]
        for it in self.items:
            mark = "ok  " if it.ok else "FAIL"
            lines.append(f"  [{mark}] {it.name}" + (f"  ({it.detail})" if it.detail else ""))
        for k, v in self.results.items():
            lines.append(f"  {k}: {_flat(v)}")
        for r in self.residuals:
            lines.append(f"  residual: {r}")
        for n in self.notes:
            lines.append(f"  note: {n}")
        if self.timings:
            lines.append("  time: " + ", ".join(f"{k} {v:.2f}s" for k, v in self.timings.items()))
        return "\n".join(lines)


def _flat(v) -> str:
    if isinstance(v, dict):
        return ", ".join(f"{k}={_flat(x)}" for k, x in v.items())
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_flat(x) for x in v) + "]"
    return str(v)
