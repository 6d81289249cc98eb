"""
Rate Service - lumped propensities summed over macro-states.
"""
from typing import Optional, Sequence
from models.geometry import MacroState
from models.network import Reaction
from .factors import binomial_range_sum, plan_for
from .geometry_service import stay_set


def lumped_rate(reaction: Reaction, box: Optional[MacroState]) -> float:
    """Sum of the propensity over all micro-states of the box (0 for an empty box)."""
    if box is None:
        return 0.0
    return plan_for(reaction).box_sum(box.lower, box.upper)


def exit_rate(reaction: Reaction, box: MacroState, change: Sequence[int] = None) -> float:
    """Total rate of micro-states leaving the box: lumped(box) - lumped(stay set)."""
    if change is None:
        change = reaction.change
    if not any(change):
        return 0.0
    total = lumped_rate(reaction, box)
    remaining = lumped_rate(reaction, stay_set(box, change))
    return max(total - remaining, 0.0)


__all__ = ["lumped_rate", "exit_rate", "binomial_range_sum"]
