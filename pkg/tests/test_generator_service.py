import numpy as np
import pytest
from scipy import sparse
from config import ROW_SUM_TOLERANCE
from models.geometry import LumpedSpace, MacroState
from services.generator_service import assemble, make_absorbing
from services.geometry_service import initial_grid
from services.propensity_service import evaluate_propensity
from tests.conftest import random_mass_action_network


def micro_generator(space, network):
    """Generator built state by state from the propensities (sink last)."""
    n = len(space)
    dense = np.zeros((n + 1, n + 1))
    for i, state in enumerate(space.states):
        x = state.lower
        for reaction in network.reactions:
            rate = evaluate_propensity(reaction, x)
            if rate == 0.0 or not any(reaction.change):
                continue
            target = tuple(a + v for a, v in zip(x, reaction.change))
            k = space.locate(target) if min(target) >= 0 else -1
            dense[i, k if k >= 0 else n] += rate
        dense[i, i] = -dense[i].sum()
    return dense


def test_birth_death_micro_example(birth_death):
    generator = assemble(initial_grid((2,), 0), birth_death)
    q = generator.matrix.toarray()
    sink = generator.sink_row
    assert q[0, 1] == pytest.approx(10.0)
    assert q[1, 2] == pytest.approx(10.0)
    assert q[1, 0] == pytest.approx(0.1)
    assert q[2, 1] == pytest.approx(0.2)
    assert q[2, sink] == pytest.approx(10.0)
    assert np.diag(q)[:3] == pytest.approx([-10.0, -10.1, -10.2])
    assert not q[sink].any()


def test_single_box_exit_goes_to_sink(birth_death):
    space = LumpedSpace(states=(MacroState(lower=(0,), upper=(4,)),))
    birth_only = birth_death.model_copy(update={"reactions": birth_death.reactions[:1]})
    q = assemble(space, birth_only).matrix.toarray()
    assert q[0, 1] == pytest.approx(2.0)
    assert q[0, 0] == pytest.approx(-2.0)


def test_rows_sum_to_zero(birth_death, parallel_poisson, rng):
    cases = [
        (initial_grid((127,), 4), birth_death),
        (initial_grid((37, 21), 3), parallel_poisson),
        (initial_grid((12, 9), 2), random_mass_action_network(rng, 2, 6)),
    ]
    for space, network in cases:
        generator = assemble(space, network)
        scale = max(1.0, abs(generator.matrix).max())
        assert np.abs(generator.row_sums()).max() <= ROW_SUM_TOLERANCE * scale
        off_diagonal = generator.matrix - sparse.diags(generator.matrix.diagonal())
        assert off_diagonal.min() >= 0.0


def test_micro_granularity_is_exact(birth_death, rng):
    space = initial_grid((100,), 0)
    assert np.array_equal(assemble(space, birth_death).matrix.toarray(), micro_generator(space, birth_death))
    for _ in range(3):
        network = random_mass_action_network(rng, 2, 5)
        space = initial_grid((19, 19), 0)
        assembled = assemble(space, network).matrix.toarray()
        np.testing.assert_allclose(assembled, micro_generator(space, network), rtol=1e-14, atol=0.0)


def test_lumped_entries_aggregate_micro_rates(rng):
    network = random_mass_action_network(rng, 2, 5)
    lumped = initial_grid((15, 15), 2)
    micro = initial_grid((15, 15), 0)
    fine = micro_generator(micro, network)
    q = assemble(lumped, network).matrix.toarray()
    for i, box in enumerate(lumped.states):
        rows = [micro.locate(x) for x in box.micro_states()]
        for k, target in enumerate(lumped.states):
            if k == i:
                continue
            cols = [micro.locate(x) for x in target.micro_states()]
            expected = fine[np.ix_(rows, cols)].sum()
            assert q[i, k] * box.volume == pytest.approx(expected, rel=1e-10, abs=1e-10)


def test_neighbour_search_scales_linearly(parallel_poisson):
    small = assemble(initial_grid((49, 49), 0), parallel_poisson)
    large = assemble(initial_grid((99, 99), 0), parallel_poisson)
    assert large.stats["boxes"] == 10_000
    per_box_small = small.stats["candidate_checks"] / small.stats["boxes"]
    per_box_large = large.stats["candidate_checks"] / large.stats["boxes"]
    assert per_box_large <= 1.1 * per_box_small
    assert large.stats["candidate_checks"] <= 4 * large.stats["boxes"] * large.stats["reactions"]


def test_make_absorbing(birth_death):
    generator = assemble(initial_grid((60,), 0), birth_death)
    absorbed = make_absorbing(generator, [40])
    q = absorbed.matrix.toarray()
    assert not q[40].any()
    assert q[39, 40] == pytest.approx(10.0)
    again = make_absorbing(absorbed, [absorbed.sink_row])
    assert (again.matrix != absorbed.matrix).nnz == 0


def test_coordinate_dump_lists_every_entry(birth_death):
    generator = assemble(initial_grid((2,), 0), birth_death)
    lines = generator.to_coordinate_text().splitlines()
    assert len(lines) == generator.matrix.nnz
    assert lines[0] == "0 0 -10.0"
