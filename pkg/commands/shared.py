"""
Shared command plumbing: option types, model loading with overrides, error mapping.
"""
import functools
import logging
from pathlib import Path
from typing import Annotated, Optional
import typer
from pydantic import ValidationError
from rich.console import Console
from models.document import ModelDocument, RefinementOptions
from models.errors import BridgifyError, ModelValidationError
from models.results import BridgingSolution, RefinementTrace, RunReport
from services.dsl_service import load_model
from storage.connection import open_output_dir

logger = logging.getLogger(__name__)

console = Console()
error_console = Console(stderr=True)

ModelArgument = Annotated[Path, typer.Argument(help="Path to a .mjp model document")]
OutOption = Annotated[Optional[Path], typer.Option("--out", help="Output directory")]
DeltaOption = Annotated[Optional[float], typer.Option("--delta", help="Truncation threshold")]
GridExponentOption = Annotated[
    Optional[int], typer.Option("--grid-exponent", help="Initial macro-state side 2^m")
]
TimePointsOption = Annotated[Optional[int], typer.Option("--time-points", help="Grid size on [0, T]")]
RtolOption = Annotated[Optional[float], typer.Option("--rtol", help="Relative integrator tolerance")]
AtolOption = Annotated[Optional[float], typer.Option("--atol", help="Absolute integrator tolerance")]
DumpGeneratorOption = Annotated[
    bool, typer.Option("--dump-generator", help="Write the final generator as row/col/rate lines")
]


def handle_errors(command):
    """Map BridgifyError to its exit code with the detail on standard error."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except BridgifyError as e:
            logger.debug("[CLI] %s failed", command.__name__, exc_info=True)
            error_console.print(f"error: {e}", markup=False, highlight=False)
            raise typer.Exit(code=e.exit_code)

    return wrapper


def load_document(
    model: Path,
    delta: Optional[float] = None,
    grid_exponent: Optional[int] = None,
    time_points: Optional[int] = None,
    rtol: Optional[float] = None,
    atol: Optional[float] = None,
) -> ModelDocument:
    """Load a model; command-line flags override the document's options line."""
    if not model.is_file():
        raise BridgifyError(f"model file not found: {model}")
    document = load_model(model)
    flags = {
        "delta": delta,
        "grid_exponent": grid_exponent,
        "time_points": time_points,
        "rtol": rtol,
        "atol": atol,
    }
    updates = {key: value for key, value in flags.items() if value is not None}
    if not updates:
        return document
    try:
        options = RefinementOptions(**{**document.options.model_dump(), **updates})
        return ModelDocument(
            network=document.network,
            initial=document.initial,
            terminal=document.terminal,
            horizon=document.horizon,
            options=options,
        )
    except ValidationError as e:
        raise ModelValidationError(f"invalid option override: {e.errors()[0]['msg']}") from e


def prepare_output(out: Optional[Path]) -> Path:
    return open_output_dir(out)


def base_report(query: str, model: Path, document: ModelDocument, trace: RefinementTrace) -> RunReport:
    return RunReport(
        query=query,
        model=model.name,
        options=document.options.model_dump(mode="json"),
        iterations=len(trace.records),
        overall_states=trace.overall_states,
        truncation_size=trace.final_size,
        notes=list(trace.notes),
        solver=trace.records[-1].solver if trace.records else {},
    )


def duality_fields(bridging: BridgingSolution, trace: RefinementTrace, document: ModelDocument) -> dict:
    """Forward evidence against the backward normalizer at micro granularity."""
    evidence = trace.records[-1].forward_evidence
    value = max(bridging.normalizer, evidence)
    gap = abs(evidence - bridging.normalizer)
    return {
        "normalizer": bridging.normalizer,
        "forward_evidence": evidence,
        "duality_gap": gap,
        "duality_ok": gap <= 10 * (document.options.rtol * value + trace.records[-1].atol),
    }
