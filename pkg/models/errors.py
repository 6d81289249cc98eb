"""
Exception family for model loading and numerical analysis.

Every error carries a human readable ``detail`` and the process ``exit_code``
the command line maps it to.
"""
from typing import Optional, Sequence
from config import EXIT_INPUT_ERROR, EXIT_NUMERICAL_ERROR


class BridgifyError(Exception):
    """Base class; mirrors an HTTP error with a status and a detail."""

    exit_code = EXIT_INPUT_ERROR

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class ModelParseError(BridgifyError):
    """Syntax error in a `.mjp` document."""

    def __init__(self, detail: str, line: int, column: int, expected: Sequence[str] = ()):
        self.line = line
        self.column = column
        self.expected = tuple(expected)
        message = f"line {line}, column {column}: {detail}"
        if self.expected:
            message += f" (expected {', '.join(self.expected)})"
        super().__init__(message)


class ModelValidationError(BridgifyError):
    """Well-formed document that violates a model invariant."""


class DomainError(BridgifyError):
    """State outside the nonnegative integer lattice."""


class GeometryError(BridgifyError):
    """Macro-states that do not form a valid partition."""


class NumericalError(BridgifyError):
    """Integrator failure (step-size underflow / stiffness)."""

    exit_code = EXIT_NUMERICAL_ERROR

    def __init__(self, detail: str, time: Optional[float] = None):
        self.time = time
        if time is not None:
            detail = f"{detail} (at t={time:.6g})"
        super().__init__(detail)


class UnreachableTerminalError(BridgifyError):
    """The terminal event has no numerically positive probability on the truncation."""

    exit_code = EXIT_NUMERICAL_ERROR

    def __init__(self, detail: str, sink_mass: float = 0.0, max_gamma: float = 0.0, trace=None):
        self.sink_mass = sink_mass
        self.max_gamma = max_gamma
        self.trace = trace
        super().__init__(
            f"{detail}; sink mass {sink_mass:.6g}, largest bridging probability {max_gamma:.6g}"
        )


class ObservationError(BridgifyError):
    """Observation is incompatible with the prior on the current truncation."""

    exit_code = EXIT_NUMERICAL_ERROR
