"""
Propensity Service - reaction rates and stoichiometry on micro-states.
"""
from typing import Sequence, Tuple
from models.errors import DomainError
from models.network import Reaction
from .factors import plan_for


def evaluate_propensity(reaction: Reaction, state: Sequence[int]) -> float:
    """Rate of a reaction in a micro-state; zero when reactants are missing."""
    if len(state) != len(reaction.loss):
        raise DomainError(f"state {tuple(state)} has {len(state)} components, expected {len(reaction.loss)}")
    if any(x < 0 for x in state):
        raise DomainError(f"negative population in state {tuple(state)}")
    return plan_for(reaction).evaluate(state)


def stoichiometric_change(reaction: Reaction) -> Tuple[int, ...]:
    """Net change v = gain - loss."""
    return reaction.change
