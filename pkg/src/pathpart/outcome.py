"""The result type every solver returns."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .instances import PathPartition

FOUND = "Found"
INFEASIBLE = "Infeasible"
BUDGET = "BudgetExhausted"
FAILED = "Failed"


@dataclass
class SolveOutcome:
    tag: str
    partition: Optional[PathPartition] = None
    nodes_explored: int = 0
    certificate: Optional[str] = None
    step: Optional[str] = None
    detail: Optional[str] = None
    route: Optional[str] = None
    steps: list[str] = field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.tag == FOUND

    @classmethod
    def failed(cls, step: str, detail: str = "", **kw) -> "SolveOutcome":
        return cls(FAILED, step=step, detail=detail, **kw)

    def to_json(self) -> dict:
        out = {"tag": self.tag, "nodes_explored": self.nodes_explored}
        if self.partition is not None:
            out["partition"] = self.partition.to_json()
        for key in ("certificate", "step", "detail"):
            if getattr(self, key) is not None:
                out[key] = getattr(self, key)
        return out

    def route_log(self) -> dict:
        return {"route": self.route, "steps": list(self.steps), "outcome": self.to_json()}
