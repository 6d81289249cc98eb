import math
import numpy as np
import pytest
from scipy import sparse
from scipy.stats import poisson
from models.geometry import LumpedSpace, MacroState
from services.generator_service import SparseGenerator, assemble, make_absorbing
from services.geometry_service import initial_grid
from services.solver_service import solve_backward, solve_forward, time_grid


def point_mass(dimension, row):
    vector = np.zeros(dimension)
    vector[row] = 1.0
    return vector


def test_time_grid_is_equispaced_with_exact_endpoints():
    grid = time_grid(0.3, 7)
    assert grid[0] == 0.0 and grid[-1] == 0.3
    assert np.all(np.diff(grid) > 0)


@pytest.mark.parametrize("method", ["BDF", "Radau", "RK45", "DOP853"])
def test_two_state_forward_and_backward(two_state, method):
    space = initial_grid((1, 1), 0)
    generator = assemble(space, two_state)
    grid = time_grid(1.0, 11)
    start, goal = space.locate((1, 0)), space.locate((0, 1))

    forward = solve_forward(generator, point_mass(generator.dimension, start), grid, 1e-10, 1e-14, method)
    assert forward.values[-1, start] == pytest.approx(math.exp(-1), rel=1e-7)
    assert forward.values[-1, goal] == pytest.approx(1 - math.exp(-1), rel=1e-7)

    backward = solve_backward(generator, point_mass(generator.dimension, goal), grid, 1e-10, 1e-14, method)
    assert backward.values[0, start] == pytest.approx(1 - math.exp(-1), rel=1e-7)
    assert backward.values[-1, goal] == 1.0
    assert backward.values[:, generator.sink_row] == pytest.approx(0.0, abs=1e-14)


def test_zero_generator_keeps_the_initial_vector():
    space = LumpedSpace(states=(MacroState.point((0,)), MacroState.point((1,))))
    generator = SparseGenerator(matrix=sparse.csr_matrix((3, 3)), space=space)
    initial = np.array([0.25, 0.75, 0.0])
    forward = solve_forward(generator, initial, time_grid(5.0, 6))
    assert np.allclose(forward.values, initial)


def test_all_ones_terminal_stays_one(two_state):
    space = LumpedSpace(states=(MacroState.point((1, 0)), MacroState.point((0, 1))))
    generator = assemble(space, two_state)
    backward = solve_backward(generator, np.array([1.0, 1.0, 0.0]), time_grid(2.0, 21))
    assert np.allclose(backward.values[:, :2], 1.0, atol=1e-10)


def test_birth_death_matches_poisson_law(birth_death):
    space = initial_grid((200,), 0)
    generator = assemble(space, birth_death)
    grid = time_grid(50.0, 51)
    forward = solve_forward(generator, point_mass(generator.dimension, 0), grid, rtol=1e-8, atol=1e-12)
    counts = np.arange(201)
    for t in (1, 10, 50):
        mean = 100 * (1 - math.exp(-0.1 * t))
        distance = 0.5 * np.abs(forward.clamped()[t, :-1] - poisson.pmf(counts, mean)).sum()
        assert distance <= 1e-4
    assert np.abs(forward.values.sum(axis=1) - 1.0).max() <= 1e-9
    assert np.all(np.diff(forward.values[:, -1]) >= -1e-12)


def test_duality_of_forward_and_backward(birth_death):
    space = initial_grid((127,), 0)
    generator = assemble(space, birth_death)
    grid = time_grid(10.0, 101)
    rtol, atol = 1e-8, 1e-14
    forward = solve_forward(generator, point_mass(generator.dimension, 0), grid, rtol, atol)
    backward = solve_backward(generator, point_mass(generator.dimension, 40), grid, rtol, atol)
    reach = backward.values[0, 0]
    assert forward.values[-1, 40] == pytest.approx(reach, rel=1e-5)
    assert np.argmax(backward.values[50, :-1]) < 40


def test_halving_tolerances_stays_within_the_error_estimate(birth_death):
    space = initial_grid((127,), 0)
    generator = assemble(space, birth_death)
    grid = time_grid(10.0, 101)
    start = point_mass(generator.dimension, 0)
    rtol, atol = 1e-8, 1e-14
    coarse = solve_forward(generator, start, grid, rtol, atol, "DOP853").values[-1, 40]
    fine = solve_forward(generator, start, grid, rtol / 2, atol / 2, "DOP853").values[-1, 40]
    assert abs(fine - coarse) <= 5 * (rtol * coarse + atol)


def test_backward_is_nonincreasing_in_time_for_absorbing_goal(birth_death):
    space = initial_grid((60,), 0)
    generator = make_absorbing(assemble(space, birth_death), [40])
    backward = solve_backward(generator, point_mass(generator.dimension, 40), time_grid(10.0, 51), 1e-9, 1e-14)
    assert np.all(np.diff(backward.values[:, 0]) <= 1e-10)
    assert backward.values[:, 40] == pytest.approx(np.ones(51))


def test_vector_shape_is_checked(birth_death):
    generator = assemble(initial_grid((5,), 0), birth_death)
    with pytest.raises(ValueError):
        solve_forward(generator, np.ones(3), time_grid(1.0, 3))
    with pytest.raises(ValueError):
        solve_backward(generator, np.ones(3), time_grid(1.0, 3))
