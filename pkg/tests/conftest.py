"""Shared fixtures: small networks, documents and a seeded random network factory."""
from typing import Sequence, Tuple
import numpy as np
import pytest
from models.document import ModelDocument, PointInitial, PointTerminal, RefinementOptions
from models.network import MassAction, Reaction, ReactionNetwork, Species

RNG_SEED = 20240613


def mass_action_network(
    names: Sequence[str], reactions: Sequence[Tuple[Sequence[int], Sequence[int], float]]
) -> ReactionNetwork:
    """Network from (loss, gain, rate) triples."""
    return ReactionNetwork(
        species=tuple(Species(name=name, index=k) for k, name in enumerate(names)),
        reactions=tuple(
            Reaction(
                name=f"r{j}",
                loss=tuple(loss),
                gain=tuple(gain),
                propensity=MassAction(rate=rate),
            )
            for j, (loss, gain, rate) in enumerate(reactions)
        ),
    )


def random_mass_action_network(rng: np.random.Generator, n_species: int, n_reactions: int) -> ReactionNetwork:
    """Random network with reactant and product orders up to 3."""
    reactions = []
    while len(reactions) < n_reactions:
        loss = rng.integers(0, 4, size=n_species)
        gain = rng.integers(0, 4, size=n_species)
        if not (loss - gain).any():
            continue
        reactions.append((loss.tolist(), gain.tolist(), float(rng.uniform(0.1, 5.0))))
    return mass_action_network([f"S{k}" for k in range(n_species)], reactions)


@pytest.fixture
def rng():
    return np.random.default_rng(RNG_SEED)


@pytest.fixture
def birth_death():
    """Arrivals at rate 10, departures at rate 0.1 per individual."""
    return mass_action_network(["A"], [((0,), (1,), 10.0), ((1,), (0,), 0.1)])


@pytest.fixture
def parallel_poisson():
    return mass_action_network(["A", "B"], [((0, 0), (1, 0), 1.0), ((0, 0), (0, 1), 1.0)])


@pytest.fixture
def two_state():
    """A -> B at rate 1; state (1, 0) is '0' and (0, 1) is '1'."""
    return mass_action_network(["A", "B"], [((1, 0), (0, 1), 1.0)])


@pytest.fixture
def seir():
    return mass_action_network(
        ["S", "E", "I"],
        [((1, 0, 1), (0, 1, 1), 0.5), ((0, 1, 0), (0, 0, 1), 3.0), ((0, 0, 1), (0, 0, 0), 3.0)],
    )


@pytest.fixture
def two_state_bridge(two_state):
    """Bridge from state 0 to state 1 over [0, 1] at micro granularity."""
    return ModelDocument(
        network=two_state,
        initial=PointInitial(state=(1, 0)),
        terminal=PointTerminal(state=(0, 1)),
        horizon=1.0,
        options=RefinementOptions(
            delta=1e-4, grid_exponent=0, time_points=101, rtol=1e-10, atol=1e-14, bounds=(1, 1)
        ),
    )
