"""
Power grid schemas.

A PowerGrid is a flat list of cells, one per (group, param, method), and
serializes to CSV with the columns of CSV_COLUMNS. Every grid written to
disk is accompanied by a RunManifest.
"""

import csv
import io
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field

CSV_COLUMNS = ("param", "method", "power", "mc_se", "source", "group")


def format_number(value: Optional[float]) -> str:
    """17 significant digits, so values survive a CSV round trip unchanged."""
    if value is None:
        return ""
    return f"{float(value):.17g}"


class PowerCell(BaseModel):
    """One value of a power grid."""

    param: float
    method: str
    power: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    mc_se: Optional[float] = Field(default=None, ge=0.0)
    source: Literal["analytic", "monte-carlo"]
    group: str = ""


class PowerGrid(BaseModel):
    """A table or figure worth of power (or Q) values."""

    target: str
    description: str = ""
    param_name: str = "param"
    cells: List[PowerCell] = Field(default_factory=list)

    def groups(self) -> List[str]:
        seen: List[str] = []
        for cell in self.cells:
            if cell.group not in seen:
                seen.append(cell.group)
        return seen

    def methods(self) -> List[str]:
        seen: List[str] = []
        for cell in self.cells:
            if cell.method not in seen:
                seen.append(cell.method)
        return seen

    def params(self, group: Optional[str] = None) -> List[float]:
        seen: List[float] = []
        for cell in self.cells:
            if (group is None or cell.group == group) and cell.param not in seen:
                seen.append(cell.param)
        return seen

    def row(self, method: str, group: str = "") -> List[Optional[float]]:
        """Values of one method within one group, in parameter order."""
        return [c.power for c in self.cells if c.method == method and c.group == group]

    def cell(self, method: str, param: float, group: str = "") -> PowerCell:
        for c in self.cells:
            if c.method == method and c.group == group and abs(c.param - param) < 1e-12:
                return c
        raise KeyError(f"no cell for method={method} param={param} group={group}")

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for c in self.cells:
            writer.writerow(
                [
                    format_number(c.param),
                    c.method,
                    format_number(c.power),
                    format_number(c.mc_se),
                    c.source,
                    c.group,
                ]
            )
        return buffer.getvalue()

    @classmethod
    def from_csv(cls, text: str, target: str = "") -> "PowerGrid":
        reader = csv.DictReader(io.StringIO(text))
        cells = [
            PowerCell(
                param=float(r["param"]),
                method=r["method"],
                power=float(r["power"]) if r["power"] else None,
                mc_se=float(r["mc_se"]) if r["mc_se"] else None,
                source=r["source"],
                group=r["group"],
            )
            for r in reader
        ]
        return cls(target=target, cells=cells)


class RunManifest(BaseModel):
    """What produced a grid: plan, seed, budget and wall time."""

    target: str
    version: str
    plan: Dict[str, Any] = Field(default_factory=dict)
    seed: Optional[int] = None
    budget: Optional[str] = None
    replications: Optional[int] = None
    threads: int = 1
    wall_time: float = Field(ge=0.0)
    created: str
    outputs: List[str] = Field(default_factory=list)
