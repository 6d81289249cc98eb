"""
Occupation command - expected time per state under the bridge.
"""
import logging
import time
from services.bridge_service import occupation_time, refine
from storage.artifact_repository import ArtifactRepository
from .shared import (
    AtolOption,
    DeltaOption,
    GridExponentOption,
    ModelArgument,
    OutOption,
    RtolOption,
    TimePointsOption,
    base_report,
    console,
    duality_fields,
    handle_errors,
    load_document,
    prepare_output,
)

logger = logging.getLogger(__name__)


@handle_errors
def cmd_occupation(
    model: ModelArgument,
    out: OutOption = None,
    delta: DeltaOption = None,
    grid_exponent: GridExponentOption = None,
    time_points: TimePointsOption = None,
    rtol: RtolOption = None,
    atol: AtolOption = None,
):
    """Expected occupation times, initial and terminal states excluded."""
    started = time.perf_counter()
    document = load_document(model, delta, grid_exponent, time_points, rtol, atol)
    prepare_output(out)
    species = document.network.species_names

    bridging, trace = refine(document)
    occupation = occupation_time(bridging)
    total = sum(occupation.values())
    if total > document.horizon * (1 + 1e-6):
        logger.warning("[CLI] total occupation %.6g exceeds the horizon %.6g", total, document.horizon)

    report = base_report("occupation", model, document, trace).model_copy(
        update=duality_fields(bridging, trace, document)
    )
    ArtifactRepository.save_occupation(occupation, species)
    ArtifactRepository.save_trace(trace)
    ArtifactRepository.save_summary(report)
    ArtifactRepository.save_timing(time.perf_counter() - started)

    if occupation:
        peak = max(occupation, key=occupation.get)
        console.print(f"total occupation {total:.6g}  peak state {peak} ({occupation[peak]:.4g})")
