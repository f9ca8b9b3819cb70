"""Pydantic schemas for run artifacts."""

from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field

from spinqdd.schemas.scenario import Scenario


class SnapshotMeta(BaseModel):
    """Sidecar of a raw float64 field snapshot."""

    nx: int
    ny: int
    lx: float
    ly: float
    name: str
    time: float


class RunManifest(BaseModel):
    """Everything needed to reproduce a run; contains no wall-clock data."""

    scenario: Scenario
    scenario_hash: str
    versions: Dict[str, str]
    outputs: List[str] = Field(default_factory=list)
    status: Literal["completed", "failed"] = "completed"
    failure: Optional[Dict[str, Any]] = None
    summary: Dict[str, Any] = Field(default_factory=dict)
