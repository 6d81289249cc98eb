import itertools
import math
import pytest
from models.errors import DomainError
from models.network import Hill, Reaction
from services.propensity_service import evaluate_propensity, stoichiometric_change
from tests.conftest import mass_action_network


def test_death_rate_is_linear(birth_death):
    death = birth_death.reactions[1]
    assert evaluate_propensity(death, (40,)) == pytest.approx(4.0)


def test_missing_reactants_give_zero(birth_death, seir):
    assert evaluate_propensity(birth_death.reactions[1], (0,)) == 0.0
    assert evaluate_propensity(seir.reactions[0], (5, 0, 0)) == 0.0


def test_dimerization_counts_pairs():
    network = mass_action_network(["X"], [((2,), (0,), 1.0)])
    assert evaluate_propensity(network.reactions[0], (3,)) == 3.0


def test_mass_action_matches_binomial_products():
    network = mass_action_network(["X", "Y"], [((2, 1), (0, 3), 0.7)])
    reaction = network.reactions[0]
    for x, y in itertools.product(range(21), repeat=2):
        expected = 0.7 * math.comb(x, 2) * math.comb(y, 1)
        assert evaluate_propensity(reaction, (x, y)) == pytest.approx(expected, rel=1e-15, abs=0.0)


def test_hill_rate():
    reaction = Reaction(name="make_a", loss=(0, 0), gain=(1, 0), propensity=Hill(numerator=10, species=1))
    assert evaluate_propensity(reaction, (0, 3)) == pytest.approx(2.5)


def test_negative_or_misshaped_state_is_rejected(birth_death):
    with pytest.raises(DomainError):
        evaluate_propensity(birth_death.reactions[0], (-1,))
    with pytest.raises(DomainError):
        evaluate_propensity(birth_death.reactions[0], (1, 2))


def test_stoichiometric_change(birth_death, seir):
    assert stoichiometric_change(seir.reactions[0]) == (-1, 1, 0)
    assert stoichiometric_change(birth_death.reactions[0]) == (1,)
    network = mass_action_network(["X"], [((2,), (0,), 1.0)])
    assert stoichiometric_change(network.reactions[0]) == (-2,)
