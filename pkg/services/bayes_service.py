"""
Bayes Service - distributional endpoints, terminal posteriors and smoothing.
"""
import logging
from typing import Dict, List, Tuple
import numpy as np
from config import DISTRIBUTION_TOLERANCE, PROBABILITY_SLACK
from models.document import BinaryTest, ModelDocument, ObservationTerminal
from models.errors import ModelValidationError, ObservationError, UnreachableTerminalError
from models.geometry import LumpedSpace
from models.results import PosteriorResult, TimeGridSolution
from .bridge_service import refine
from .generator_service import SparseGenerator
from .observation_service import box_likelihood
from .solver_service import solve_backward, solve_forward

logger = logging.getLogger(__name__)

State = Tuple[int, ...]


def generalized_forward(
    generator: SparseGenerator, initial: np.ndarray, grid: np.ndarray, **tolerances
) -> TimeGridSolution:
    """Forward solution seeded with an initial distribution instead of a point mass."""
    initial = np.asarray(initial, dtype=float)
    if np.any(initial < 0.0):
        raise ModelValidationError("initial distribution has negative entries")
    if abs(initial.sum() - 1.0) > DISTRIBUTION_TOLERANCE:
        raise ModelValidationError(f"initial distribution sums to {initial.sum()!r}, not 1")
    return solve_forward(generator, initial, grid, **tolerances)


def generalized_backward(
    generator: SparseGenerator, weights: np.ndarray, grid: np.ndarray, **tolerances
) -> TimeGridSolution:
    """Backward solution seeded with terminal weights in [0, 1]."""
    weights = np.asarray(weights, dtype=float)
    if np.any(weights < 0.0) or np.any(weights > 1.0 + PROBABILITY_SLACK):
        raise ModelValidationError("terminal weights must lie in [0, 1]")
    return solve_backward(generator, weights, grid, **tolerances)


def terminal_posterior(
    space: LumpedSpace, prior: np.ndarray, observation: BinaryTest
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """Bayes' rule on the current truncation.

    Args:
        space: lumped space the prior lives on
        prior: forward probabilities at the observation time (sink entry allowed)
        observation: binary test with its observed count

    Returns:
        (likelihood, unnormalized weights, posterior, evidence); the
        unnormalized likelihood vector is the backward seed.
    """
    prior = np.clip(np.asarray(prior, dtype=float)[: len(space)], 0.0, None)
    likelihood = box_likelihood(space, observation)
    weights = likelihood * prior
    evidence = float(weights.sum())
    if not evidence > 0.0:
        raise ObservationError("observation incompatible with prior truncation")
    return likelihood, weights, weights / evidence, evidence


def _species_marginals(
    document: ModelDocument, states: List[State], prior: np.ndarray, posterior: np.ndarray
) -> Dict[str, Dict[str, List[float]]]:
    marginals = {}
    for dim, name in enumerate(document.network.species_names):
        values = sorted({state[dim] for state in states})
        position = {value: k for k, value in enumerate(values)}
        prior_mass = np.zeros(len(values))
        posterior_mass = np.zeros(len(values))
        for state, p, q in zip(states, prior, posterior):
            prior_mass[position[state[dim]]] += p
            posterior_mass[position[state[dim]]] += q
        marginals[name] = {
            "values": [float(v) for v in values],
            "prior": prior_mass.tolist(),
            "posterior": posterior_mass.tolist(),
        }
    return marginals


def smooth(document: ModelDocument) -> PosteriorResult:
    """Smoothed bridge and terminal posterior for an observation terminal."""
    terminal = document.terminal
    if not isinstance(terminal, ObservationTerminal):
        raise ModelValidationError("smoothing needs an observation terminal")
    observation = terminal.observation

    try:
        bridging, trace = refine(document)
    except UnreachableTerminalError as e:
        raise ObservationError("observation incompatible with prior truncation") from e
    space = bridging.space
    prior_at_T = bridging.forward.at(-1).values
    likelihood, _, posterior, evidence = terminal_posterior(space, prior_at_T, observation)
    prior = prior_at_T[: len(space)]
    prior = prior / prior.sum() if prior.sum() > 0 else prior
    logger.info(
        "[Smooth] evidence %.6g on %d states, observed %d of %d",
        evidence, len(space), observation.observed, observation.total,
    )

    states = [box.lower for box in space.states]
    names = document.network.species_names
    latent_dims = [d for d in range(document.network.n_species) if d != observation.species]
    joint: Dict[State, List[float]] = {}
    for state, p, q in zip(states, prior, posterior):
        key = tuple(state[d] for d in latent_dims)
        entry = joint.setdefault(key, [0.0, 0.0])
        entry[0] += float(p)
        entry[1] += float(q)

    return PosteriorResult(
        states=states,
        prior=prior,
        likelihood=likelihood,
        posterior=posterior,
        evidence=evidence,
        bridging=bridging,
        marginals=_species_marginals(document, states, prior, posterior),
        latent_species=tuple(names[d] for d in latent_dims),
        latent_joint={key: (p, q) for key, (p, q) in sorted(joint.items())},
        trace=trace,
    )
