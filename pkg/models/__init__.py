"""Bridgify Models Package"""
from .errors import (
    BridgifyError,
    ModelParseError,
    ModelValidationError,
    DomainError,
    GeometryError,
    NumericalError,
    UnreachableTerminalError,
    ObservationError,
)
from .network import Species, MassAction, Hill, CustomFactor, SeparableCustom, Reaction, ReactionNetwork
from .geometry import MacroState, BoxIndex, LumpedSpace
from .document import (
    PointInitial,
    TableInitial,
    Interval,
    Predicate,
    BinaryTest,
    PointTerminal,
    PredicateTerminal,
    ObservationTerminal,
    RefinementOptions,
    ModelDocument,
)
from .results import (
    ProbabilityVector,
    TimeGridSolution,
    BridgingSolution,
    IterationRecord,
    RefinementTrace,
    RareEventResult,
    PosteriorResult,
    RareTableRow,
    RunReport,
)

__all__ = [
    "BridgifyError",
    "ModelParseError",
    "ModelValidationError",
    "DomainError",
    "GeometryError",
    "NumericalError",
    "UnreachableTerminalError",
    "ObservationError",
    "Species",
    "MassAction",
    "Hill",
    "CustomFactor",
    "SeparableCustom",
    "Reaction",
    "ReactionNetwork",
    "MacroState",
    "BoxIndex",
    "LumpedSpace",
    "PointInitial",
    "TableInitial",
    "Interval",
    "Predicate",
    "BinaryTest",
    "PointTerminal",
    "PredicateTerminal",
    "ObservationTerminal",
    "RefinementOptions",
    "ModelDocument",
    "ProbabilityVector",
    "TimeGridSolution",
    "BridgingSolution",
    "IterationRecord",
    "RefinementTrace",
    "RareEventResult",
    "PosteriorResult",
    "RareTableRow",
    "RunReport",
]
