"""
Rare command - lower bounds on a terminal predicate for a sweep of thresholds.
"""
import logging
import time
from typing import Annotated, List, Optional
import typer
from rich.table import Table
from models.errors import BridgifyError
from models.results import RareTableRow, RunReport
from services.bridge_service import rare_event_bound
from storage.artifact_repository import ArtifactRepository
from .shared import (
    AtolOption,
    GridExponentOption,
    ModelArgument,
    OutOption,
    RtolOption,
    TimePointsOption,
    console,
    handle_errors,
    load_document,
    prepare_output,
)

logger = logging.getLogger(__name__)


@handle_errors
def cmd_rare(
    model: ModelArgument,
    delta: Annotated[
        Optional[List[float]], typer.Option("--delta", help="Truncation threshold (repeatable)")
    ] = None,
    reference: Annotated[
        Optional[float], typer.Option("--reference", help="Exact probability for relative errors")
    ] = None,
    out: OutOption = None,
    grid_exponent: GridExponentOption = None,
    time_points: TimePointsOption = None,
    rtol: RtolOption = None,
    atol: AtolOption = None,
):
    """Tabulate rare-event lower bounds over truncation thresholds."""
    started = time.perf_counter()
    if not delta:
        raise BridgifyError("at least one --delta is required")
    load_document(model)
    prepare_output(out)

    rows = []
    bound = None
    notes = []
    for value in delta:
        document = load_document(model, value, grid_exponent, time_points, rtol, atol)
        result = rare_event_bound(document)
        trace = result.trace
        relative = None
        if reference is not None and reference > 0:
            relative = abs(reference - result.bound) / reference
        rows.append(
            RareTableRow(
                delta=value,
                truncation_size=trace.final_size if result.reachable else 0,
                overall_states=trace.overall_states,
                estimate=result.bound,
                relative_error=relative,
            )
        )
        notes.extend(n for n in trace.notes if n not in notes)
        bound = result.bound
        logger.info("[CLI] delta=%g bound=%.6g", value, result.bound)

    ArtifactRepository.save_rare_table(rows)
    ArtifactRepository.save_summary(
        RunReport(
            query="rare",
            model=model.name,
            options=document.options.model_dump(mode="json"),
            bound=bound,
            truncation_size=rows[-1].truncation_size,
            overall_states=rows[-1].overall_states,
            iterations=len(trace.records),
            notes=notes,
            table=rows,
        )
    )
    ArtifactRepository.save_timing(time.perf_counter() - started)

    table = Table(title=f"Rare-event bounds: {model.name}")
    for column in ("delta", "truncation size", "overall states", "estimate", "rel. error"):
        table.add_column(column, justify="right")
    for row in rows:
        table.add_row(
            f"{row.delta:g}",
            str(row.truncation_size),
            str(row.overall_states),
            f"{row.estimate:.4e}",
            "" if row.relative_error is None else f"{row.relative_error:.4e}",
        )
    console.print(table)
