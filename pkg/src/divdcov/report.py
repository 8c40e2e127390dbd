"""Machine-readable selection reports.

JSON output is canonical: keys keep insertion order and every float is
rounded to 12 significant digits, so the same inputs give byte-identical
documents.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any


def _round(x: Any) -> Any:
    if isinstance(x, bool) or x is None:
        return x
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite value {x!r} in report")
        return float(f"{x:.12g}")
    if isinstance(x, int):
        return x
    if isinstance(x, dict):
        return {str(k): _round(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_round(v) for v in x]
    if hasattr(x, "item"):
        return _round(x.item())
    return x


@dataclass
class Stage:
    """One step of a selection run.

    ``values`` holds the numeric results of the step (objective values,
    traces, per-feature scores) keyed by name.
    """

    name: str
    selected: list[str]
    values: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "selected": list(self.selected), **self.values}


@dataclass
class SelectionReport:
    command: str
    config: dict[str, Any]
    stages: list[Stage] = field(default_factory=list)
    timing: dict[str, float] = field(default_factory=dict)

    @property
    def final(self) -> list[str]:
        return list(self.stages[-1].selected) if self.stages else []

    def to_dict(self) -> dict[str, Any]:
        return _round({
            "command": self.command,
            "config": self.config,
            "stages": [s.to_dict() for s in self.stages],
            "timing": self.timing,
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False) + "\n"
