"""Pydantic schemas for verification reports."""

from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, Field


class CheckReport(BaseModel):
    """Outcome of one catalog check."""

    name: str
    anchor: str = Field(..., description="Identity or property the check verifies")
    status: Literal["pass", "fail", "skip"]
    residuals: Dict[str, float] = Field(default_factory=dict)
    tolerance: Optional[float] = None
    orders: Dict[str, float] = Field(default_factory=dict, description="Observed convergence orders of ratio tests")
    reason: Optional[str] = None
    uses: List[str] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status != "fail"


class ValidationReport(BaseModel):
    """Self-describing result of a catalog run."""

    version: str
    scenario: str
    scenario_hash: str
    resolution: Dict[str, int]
    checks: List[CheckReport]

    @property
    def failures(self) -> List[CheckReport]:
        return [c for c in self.checks if c.status == "fail"]

    @property
    def ok(self) -> bool:
        return not self.failures

    def table(self) -> str:
        """Plain-text summary, one row per check."""
        width = max((len(c.name) for c in self.checks), default=4)
        lines = [f"{'check':<{width}}  status  worst residual  orders"]
        for c in self.checks:
            worst = max(c.residuals.values(), default=float("nan"))
            orders = ", ".join(f"{k}={v:.2f}" for k, v in c.orders.items())
            line = f"{c.name:<{width}}  {c.status:<6}  {worst:14.3e}  {orders}"
            if c.reason and c.status != "pass":
                line += f"  ({c.reason})"
            lines.append(line)
        counts = {s: sum(c.status == s for c in self.checks) for s in ("pass", "fail", "skip")}
        lines.append(f"{counts['pass']} passed, {counts['fail']} failed, {counts['skip']} skipped")
        return "\n".join(lines)
