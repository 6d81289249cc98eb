"""
Artifact repository: CSV and JSON files of an analysis run.
"""
import csv
import json
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple
import numpy as np
from config import (
    GAMMA_FILE_TEMPLATE,
    GENERATOR_DUMP_FILE,
    LATENT_JOINT_FILE,
    MARGINALS_FILE,
    MODES_FILE,
    OCCUPATION_FILE,
    POSTERIOR_FILE,
    RARE_TABLE_FILE,
    SNAPSHOT_FILE_TEMPLATE,
    SUMMARY_FILE,
    TIMING_FILE,
    TRACE_FILE,
)
from models.errors import BridgifyError
from models.results import (
    BridgingSolution,
    PosteriorResult,
    RareTableRow,
    RefinementTrace,
    RunReport,
)
from services.generator_service import SparseGenerator
from .connection import artifact_path

State = Tuple[int, ...]


def _value(x) -> str:
    """Shortest round-tripping text of a number."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


class ArtifactRepository:
    """Repository class for the files of one run (all writes go to the output directory)."""

    @staticmethod
    def write_rows(name: str, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
        """Write a CSV file with a header row."""
        path = artifact_path(name)
        try:
            with open(path, mode="w", encoding="utf-8", newline="") as file:
                writer = csv.writer(file, lineterminator="\n")
                writer.writerow(header)
                for row in rows:
                    writer.writerow([_value(x) if not isinstance(x, str) else x for x in row])
        except OSError as e:
            raise BridgifyError(f"Failed to write {path}: {e}")
        return path

    @staticmethod
    def write_json(name: str, payload: dict) -> Path:
        path = artifact_path(name)
        try:
            path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        except OSError as e:
            raise BridgifyError(f"Failed to write {path}: {e}")
        return path

    @staticmethod
    def save_gamma(bridging: BridgingSolution, species: Sequence[str]) -> List[Path]:
        """One `gamma_t<k>.csv` per grid time: coordinates then probability."""
        states = [box.lower for box in bridging.space.states]
        return [
            ArtifactRepository.write_rows(
                GAMMA_FILE_TEMPLATE.format(index=k),
                [*species, "probability"],
                ([*state, p] for state, p in zip(states, bridging.gamma[k])),
            )
            for k in range(len(bridging.grid))
        ]

    @staticmethod
    def save_snapshots(trace: RefinementTrace, species: Sequence[str]) -> List[Path]:
        """Box corners of every iteration's truncation."""
        header = [f"lower_{s}" for s in species] + [f"upper_{s}" for s in species]
        return [
            ArtifactRepository.write_rows(
                SNAPSHOT_FILE_TEMPLATE.format(index=k),
                header,
                ([*lower, *upper] for lower, upper in snapshot),
            )
            for k, snapshot in enumerate(trace.snapshots)
        ]

    @staticmethod
    def save_trace(trace: RefinementTrace) -> Path:
        return ArtifactRepository.write_json(
            TRACE_FILE, trace.model_dump(mode="json", exclude={"snapshots"})
        )

    @staticmethod
    def save_summary(report: RunReport) -> Path:
        return ArtifactRepository.write_json(SUMMARY_FILE, report.model_dump(mode="json"))

    @staticmethod
    def save_timing(wall_time: float) -> Path:
        return ArtifactRepository.write_json(TIMING_FILE, {"wall_time_seconds": wall_time})

    @staticmethod
    def save_generator(generator: SparseGenerator) -> Path:
        path = artifact_path(GENERATOR_DUMP_FILE)
        try:
            path.write_text(generator.to_coordinate_text(), encoding="utf-8")
        except OSError as e:
            raise BridgifyError(f"Failed to write {path}: {e}")
        return path

    @staticmethod
    def save_rare_table(rows: Sequence[RareTableRow]) -> Path:
        return ArtifactRepository.write_rows(
            RARE_TABLE_FILE,
            ["delta", "truncation_size", "overall_states", "estimate", "relative_error"],
            (
                [
                    row.delta, row.truncation_size, row.overall_states, row.estimate,
                    "" if row.relative_error is None else _value(row.relative_error),
                ]
                for row in rows
            ),
        )

    @staticmethod
    def save_posterior(result: PosteriorResult, species: Sequence[str]) -> Path:
        return ArtifactRepository.write_rows(
            POSTERIOR_FILE,
            [*species, "prior", "likelihood", "posterior"],
            (
                [*state, p, l, q]
                for state, p, l, q in zip(result.states, result.prior, result.likelihood, result.posterior)
            ),
        )

    @staticmethod
    def save_marginals(result: PosteriorResult) -> Path:
        rows = []
        for name, marginal in result.marginals.items():
            for value, p, q in zip(marginal["values"], marginal["prior"], marginal["posterior"]):
                rows.append([name, int(value), p, q])
        return ArtifactRepository.write_rows(MARGINALS_FILE, ["species", "value", "prior", "posterior"], rows)

    @staticmethod
    def save_latent_joint(result: PosteriorResult) -> Path:
        return ArtifactRepository.write_rows(
            LATENT_JOINT_FILE,
            [*result.latent_species, "prior", "posterior"],
            ([*key, p, q] for key, (p, q) in result.latent_joint.items()),
        )

    @staticmethod
    def save_occupation(occupation: Dict[State, float], species: Sequence[str]) -> Path:
        return ArtifactRepository.write_rows(
            OCCUPATION_FILE,
            [*species, "expected_time"],
            ([*state, value] for state, value in occupation.items()),
        )

    @staticmethod
    def save_modes(modes: Dict[State, np.ndarray], grid: np.ndarray, species: Sequence[str]) -> Path:
        """Long format: time, mode coordinates, probability."""
        return ArtifactRepository.write_rows(
            MODES_FILE,
            ["time", *species, "probability"],
            (
                [t, *mode, values[k]]
                for k, t in enumerate(grid)
                for mode, values in modes.items()
            ),
        )
