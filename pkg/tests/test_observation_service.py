import numpy as np
import pytest
from scipy.stats import binom
from models.document import BinaryTest
from models.geometry import LumpedSpace, MacroState
from services.observation_service import binary_test_matrix, box_likelihood, likelihood


@pytest.mark.parametrize("total,sensitivity,fpr", [(10, 0.99, 0.05), (30, 0.7, 0.2), (1, 0.5, 0.5)])
def test_rows_are_distributions(total, sensitivity, fpr):
    matrix = binary_test_matrix(total, sensitivity, fpr)
    assert matrix.shape == (total + 1, total + 1)
    np.testing.assert_allclose(matrix.sum(axis=1), 1.0, atol=1e-12)
    assert (matrix >= 0).all()


def test_perfect_test_is_exact():
    matrix = binary_test_matrix(8, 1.0, 0.0)
    np.testing.assert_allclose(matrix, np.eye(9), atol=1e-15)


def test_no_carriers_gives_false_positive_binomial():
    matrix = binary_test_matrix(20, 0.9, 0.1)
    np.testing.assert_allclose(matrix[0], binom.pmf(np.arange(21), 20, 0.1), rtol=1e-12)


def test_uninformative_test_has_flat_likelihood():
    observation = BinaryTest(sensitivity=0.3, fpr=0.3, observed=4, species=0, total=12)
    values = likelihood(observation, np.arange(13))
    np.testing.assert_allclose(values, binom.pmf(4, 12, 0.3), rtol=1e-10)


def test_counts_above_population_are_impossible():
    observation = BinaryTest(sensitivity=0.9, fpr=0.1, observed=2, species=0, total=5)
    values = likelihood(observation, np.array([0, 5, 6, 40]))
    assert values[0] > 0 and values[1] > 0
    assert values[2] == 0.0 and values[3] == 0.0


def test_box_likelihood_averages_members():
    observation = BinaryTest(sensitivity=0.9, fpr=0.05, observed=3, species=1, total=10)
    space = LumpedSpace(states=(MacroState.of((0, 0), (3, 3)), MacroState.of((0, 4), (3, 7))))
    weights = box_likelihood(space, observation)
    expected = likelihood(observation, np.arange(4, 8)).mean()
    assert weights[1] == pytest.approx(expected, rel=1e-14)


def test_observed_count_cannot_exceed_population():
    with pytest.raises(ValueError):
        BinaryTest(sensitivity=0.9, fpr=0.1, observed=6, species=0, total=5)
