"""
Query documents: network plus initial/terminal constraints and refinement options.
"""
from typing import Annotated, Dict, FrozenSet, Literal, Optional, Tuple, Union
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, model_validator
from config import DISTRIBUTION_TOLERANCE, EXPLICIT_METHODS, IMPLICIT_METHODS, settings
from .network import ReactionNetwork

State = Tuple[int, ...]


class PointInitial(BaseModel):
    """X_0 = state with probability one."""
    model_config = ConfigDict(frozen=True)

    kind: Literal["point"] = "point"
    state: State

    def distribution(self) -> Dict[State, float]:
        return {self.state: 1.0}


class TableInitial(BaseModel):
    """Explicit initial distribution."""
    model_config = ConfigDict(frozen=True)

    kind: Literal["table"] = "table"
    entries: Tuple[Tuple[State, float], ...]

    @model_validator(mode="after")
    def check_normalized(self):
        if not self.entries:
            raise ValueError("initial table is empty")
        if any(p < 0 for _, p in self.entries):
            raise ValueError("initial probabilities must be nonnegative")
        states = [s for s, _ in self.entries]
        if len(set(states)) != len(states):
            raise ValueError("initial table lists a state twice")
        total = sum(p for _, p in self.entries)
        if abs(total - 1.0) > DISTRIBUTION_TOLERANCE:
            raise ValueError(f"initial distribution sums to {total!r}, not 1")
        return self

    def distribution(self) -> Dict[State, float]:
        return dict(self.entries)


InitialSpec = Annotated[Union[PointInitial, TableInitial], Field(discriminator="kind")]


class Interval(BaseModel):
    """Closed integer range; upper None means unbounded."""
    model_config = ConfigDict(frozen=True)

    lower: int = 0
    upper: Optional[int] = None

    def intersect(self, other: "Interval") -> Optional["Interval"]:
        lower = max(self.lower, other.lower)
        uppers = [u for u in (self.upper, other.upper) if u is not None]
        upper = min(uppers) if uppers else None
        if upper is not None and upper < lower:
            return None
        return Interval(lower=lower, upper=upper)


class Predicate(BaseModel):
    """State predicate kept verbatim plus its disjunctive normal form.

    Every clause is a per-species tuple of intervals; a state satisfies the
    predicate when it lies in at least one clause.
    """
    model_config = ConfigDict(frozen=True)

    source: str
    clauses: Tuple[Tuple[Interval, ...], ...]

    def holds(self, state: State) -> bool:
        return any(
            all(iv.lower <= x and (iv.upper is None or x <= iv.upper) for x, iv in zip(state, clause))
            for clause in self.clauses
        )


class BinaryTest(BaseModel):
    """Each individual of one species tests positive with prob. sensitivity, others with fpr."""
    model_config = ConfigDict(frozen=True)

    kind: Literal["binary_test"] = "binary_test"
    sensitivity: float = Field(..., ge=0.0, le=1.0)
    fpr: float = Field(..., ge=0.0, le=1.0)
    observed: int = Field(..., ge=0)
    species: int = Field(..., ge=0)
    total: int = Field(..., ge=0)

    @model_validator(mode="after")
    def check_alphabet(self):
        if self.observed > self.total:
            raise ValueError(f"observed count {self.observed} exceeds population {self.total}")
        return self


class PointTerminal(BaseModel):
    """X_T = state, or first passage of state before T."""
    model_config = ConfigDict(frozen=True)

    kind: Literal["point"] = "point"
    state: State
    first_passage: bool = False


class PredicateTerminal(BaseModel):
    """X_T satisfies a predicate."""
    model_config = ConfigDict(frozen=True)

    kind: Literal["predicate"] = "predicate"
    predicate: Predicate


class ObservationTerminal(BaseModel):
    """Noisy observation of X_T."""
    model_config = ConfigDict(frozen=True)

    kind: Literal["observe"] = "observe"
    observation: BinaryTest


TerminalSpec = Annotated[
    Union[PointTerminal, PredicateTerminal, ObservationTerminal], Field(discriminator="kind")
]


class RefinementOptions(BaseModel):
    """Algorithm knobs; unset values fall back to the settings defaults."""
    model_config = ConfigDict(frozen=True)

    delta: float = Field(default_factory=lambda: settings.delta, gt=0.0, lt=1.0)
    grid_exponent: int = Field(default_factory=lambda: settings.grid_exponent, ge=0)
    time_points: int = Field(default_factory=lambda: settings.time_points, ge=2)
    rtol: PositiveFloat = Field(default_factory=lambda: settings.rtol)
    atol: PositiveFloat = Field(default_factory=lambda: settings.atol)
    method: str = Field(default_factory=lambda: settings.method)
    unlumped_dims: FrozenSet[int] = frozenset()
    bounds: Optional[Tuple[int, ...]] = None

    @model_validator(mode="after")
    def check_method(self):
        if self.method not in IMPLICIT_METHODS + EXPLICIT_METHODS:
            raise ValueError(f"unknown integration method {self.method!r}")
        if self.bounds is not None and any(b < 0 for b in self.bounds):
            raise ValueError("bounds must be nonnegative")
        return self


class ModelDocument(BaseModel):
    """A network plus one bridging query."""
    model_config = ConfigDict(frozen=True)

    network: ReactionNetwork
    initial: InitialSpec
    terminal: TerminalSpec
    horizon: PositiveFloat
    options: RefinementOptions = Field(default_factory=RefinementOptions)

    @model_validator(mode="after")
    def check_dimensions(self):
        n = self.network.n_species
        states = list(self.initial.distribution())
        if isinstance(self.terminal, PointTerminal):
            states.append(self.terminal.state)
        for state in states:
            if len(state) != n:
                raise ValueError(f"state {state} has {len(state)} components for {n} species")
            if any(x < 0 for x in state):
                raise ValueError(f"state {state} has negative components")
        if isinstance(self.terminal, PredicateTerminal):
            if any(len(clause) != n for clause in self.terminal.predicate.clauses):
                raise ValueError("predicate dimension differs from the species count")
        if isinstance(self.terminal, ObservationTerminal) and self.terminal.observation.species >= n:
            raise ValueError("observation references an unknown species")
        if any(d >= n for d in self.options.unlumped_dims):
            raise ValueError("unlumped dimension out of range")
        if self.options.bounds is not None and len(self.options.bounds) != n:
            raise ValueError(f"bounds have {len(self.options.bounds)} entries for {n} species")
        return self

    @property
    def first_passage(self) -> bool:
        return isinstance(self.terminal, PointTerminal) and self.terminal.first_passage
