"""
Result models for solver output, bridging solutions, traces and reports.
"""
from typing import Any, Dict, List, Optional, Tuple
import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from config import SCHEMA_VERSION
from .geometry import LumpedSpace

State = Tuple[int, ...]


class ProbabilityVector(BaseModel):
    """Values per macro-state row plus the sink (last entry) at one time."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    values: np.ndarray
    time: float


class TimeGridSolution(BaseModel):
    """Vectors on an equispaced time grid; values[k] belongs to grid[k]."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: np.ndarray
    values: np.ndarray
    stats: Dict[str, int] = Field(default_factory=dict)

    def at(self, k: int) -> ProbabilityVector:
        """Readout at grid index k with integrator undershoot clamped to zero."""
        return ProbabilityVector(values=np.clip(self.values[k], 0.0, None), time=float(self.grid[k]))

    def clamped(self) -> np.ndarray:
        return np.clip(self.values, 0.0, None)


class BridgingSolution(BaseModel):
    """gamma[k, row] = pi[k, row] * beta[k, row] / normalizer (sink excluded)."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    space: LumpedSpace
    grid: np.ndarray
    gamma: np.ndarray
    normalizer: float
    forward: TimeGridSolution
    backward: TimeGridSolution
    endpoint_states: Tuple[State, ...] = ()

    def distribution(self, k: int) -> Dict[State, float]:
        """Bridging probabilities at grid index k keyed by box lower corner."""
        return {box.lower: float(p) for box, p in zip(self.space.states, self.gamma[k])}


class IterationRecord(BaseModel):
    """Summary of one refinement iteration."""

    iteration: int
    boxes: int
    micro_states: int
    retained: int
    truncated: int
    normalizer: float
    forward_evidence: float
    sink_mass: float
    max_gamma: float
    atol: float = 0.0
    solver: Dict[str, Dict[str, int]] = Field(default_factory=dict)


class RefinementTrace(BaseModel):
    """Per-iteration records, truncation snapshots and notes."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    records: List[IterationRecord] = Field(default_factory=list)
    snapshots: List[List[Tuple[State, State]]] = Field(default_factory=list)
    notes: List[str] = Field(default_factory=list)
    generator: Optional[Any] = Field(default=None, exclude=True)

    @property
    def overall_states(self) -> int:
        return sum(record.boxes for record in self.records)

    @property
    def final_size(self) -> int:
        return self.records[-1].micro_states if self.records else 0


class RareEventResult(BaseModel):
    """Lower bound on the probability of a terminal predicate."""

    bound: float
    trace: RefinementTrace
    reachable: bool = True


class PosteriorResult(BaseModel):
    """Smoothing output: terminal posterior, smoothed bridge and marginals."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    states: List[State]
    prior: np.ndarray
    likelihood: np.ndarray
    posterior: np.ndarray
    evidence: float
    bridging: BridgingSolution
    marginals: Dict[str, Dict[str, List[float]]]
    latent_species: Tuple[str, ...]
    latent_joint: Dict[State, Tuple[float, float]]
    trace: RefinementTrace


class RareTableRow(BaseModel):
    """One threshold of a rare-event sweep."""

    delta: float
    truncation_size: int
    overall_states: int
    estimate: float
    relative_error: Optional[float] = None


class RunReport(BaseModel):
    """Machine-readable summary of one command invocation."""

    schema_version: int = SCHEMA_VERSION
    query: str
    model: str
    options: Dict[str, Any]
    normalizer: Optional[float] = None
    forward_evidence: Optional[float] = None
    duality_gap: Optional[float] = None
    duality_ok: Optional[bool] = None
    bound: Optional[float] = None
    truncation_size: int = 0
    overall_states: int = 0
    iterations: int = 0
    notes: List[str] = Field(default_factory=list)
    solver: Dict[str, Dict[str, int]] = Field(default_factory=dict)
    table: List[RareTableRow] = Field(default_factory=list)
