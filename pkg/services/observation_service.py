"""
Observation Service - likelihoods of noisy population tests.
"""
from functools import lru_cache
import numpy as np
from scipy.stats import binom
from config import LIKELIHOOD_ROW_TOLERANCE
from models.document import BinaryTest
from models.errors import ModelValidationError
from models.geometry import LumpedSpace


@lru_cache(maxsize=32)
def binary_test_matrix(total: int, sensitivity: float, fpr: float) -> np.ndarray:
    """L[n, y] = Pr(Y = y | n carriers) with Y = TP + FP,
    TP ~ Bin(n, sensitivity), FP ~ Bin(total - n, fpr)."""
    matrix = np.zeros((total + 1, total + 1))
    for n in range(total + 1):
        true_pos = binom.pmf(np.arange(n + 1), n, sensitivity)
        false_pos = binom.pmf(np.arange(total - n + 1), total - n, fpr)
        matrix[n] = np.convolve(true_pos, false_pos)
    row_sums = matrix.sum(axis=1)
    if np.any(np.abs(row_sums - 1.0) > LIKELIHOOD_ROW_TOLERANCE):
        raise ModelValidationError("observation likelihood rows do not sum to one")
    matrix.setflags(write=False)
    return matrix


def likelihood(observation: BinaryTest, counts: np.ndarray) -> np.ndarray:
    """Pr(observed | count) for an array of latent counts; zero above the population."""
    counts = np.asarray(counts, dtype=int)
    matrix = binary_test_matrix(observation.total, observation.sensitivity, observation.fpr)
    values = np.zeros(counts.shape)
    inside = counts <= observation.total
    values[inside] = matrix[counts[inside], observation.observed]
    return values


def box_likelihood(space: LumpedSpace, observation: BinaryTest) -> np.ndarray:
    """Average likelihood over the micro-states of every box (sink excluded)."""
    dim = observation.species
    weights = np.empty(len(space))
    for row, box in enumerate(space.states):
        counts = np.arange(box.lower[dim], box.upper[dim] + 1)
        weights[row] = likelihood(observation, counts).mean()
    return weights
