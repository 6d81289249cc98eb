"""Bridgify Services Package"""
from .propensity_service import evaluate_propensity, stoichiometric_change
from .geometry_service import transition_set, stay_set, split, initial_grid, refine_space
from .rate_service import lumped_rate, exit_rate, binomial_range_sum
from .generator_service import SparseGenerator, assemble, make_absorbing
from .solver_service import time_grid, solve_forward, solve_backward
from .observation_service import binary_test_matrix, likelihood, box_likelihood
from .bridge_service import (
    bridging_distribution,
    refine,
    rare_event_bound,
    occupation_time,
    marginal_over_time,
)
from .bayes_service import generalized_forward, generalized_backward, terminal_posterior, smooth
from .dsl_service import parse_model, render_model, load_model

__all__ = [
    "evaluate_propensity",
    "stoichiometric_change",
    "transition_set",
    "stay_set",
    "split",
    "initial_grid",
    "refine_space",
    "lumped_rate",
    "exit_rate",
    "binomial_range_sum",
    "SparseGenerator",
    "assemble",
    "make_absorbing",
    "time_grid",
    "solve_forward",
    "solve_backward",
    "binary_test_matrix",
    "likelihood",
    "box_likelihood",
    "bridging_distribution",
    "refine",
    "rare_event_bound",
    "occupation_time",
    "marginal_over_time",
    "generalized_forward",
    "generalized_backward",
    "terminal_posterior",
    "smooth",
    "parse_model",
    "render_model",
    "load_model",
]
