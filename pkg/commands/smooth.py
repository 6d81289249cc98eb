"""
Smooth command - terminal posterior and smoothed bridge for a noisy observation.
"""
import time
from services.bayes_service import smooth
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


@handle_errors
def cmd_smooth(
    model: ModelArgument,
    out: OutOption = None,
    delta: DeltaOption = None,
    grid_exponent: GridExponentOption = None,
    time_points: TimePointsOption = None,
    rtol: RtolOption = None,
    atol: AtolOption = None,
):
    """Write the terminal posterior, species marginals and the latent joint marginal."""
    started = time.perf_counter()
    document = load_document(model, delta, grid_exponent, time_points, rtol, atol)
    prepare_output(out)
    species = document.network.species_names

    result = smooth(document)
    report = base_report("smooth", model, document, result.trace).model_copy(
        update=duality_fields(result.bridging, result.trace, document)
    )

    ArtifactRepository.save_posterior(result, species)
    ArtifactRepository.save_marginals(result)
    ArtifactRepository.save_latent_joint(result)
    ArtifactRepository.save_gamma(result.bridging, species)
    ArtifactRepository.save_trace(result.trace)
    ArtifactRepository.save_summary(report)
    ArtifactRepository.save_timing(time.perf_counter() - started)

    console.print(f"evidence {result.evidence:.6g}  states {len(result.states)}")
