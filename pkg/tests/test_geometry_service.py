import itertools
import pytest
from models.errors import GeometryError
from models.geometry import LumpedSpace, MacroState
from services.geometry_service import (
    exit_count_and_rate_basis,
    initial_grid,
    refine_space,
    split,
    stay_set,
    transition_set,
    volume,
)


def box(lower, upper):
    return MacroState(lower=tuple(int(v) for v in lower), upper=tuple(int(v) for v in upper))


def test_volume():
    assert volume(box((0, 0), (15, 15))) == 256
    assert volume(box((3,), (3,))) == 1
    assert volume(box((0, 0, 2), (7, 7, 2))) == 64


def test_transition_set_examples():
    assert transition_set(box((0, 0), (3, 3)), box((4, 0), (7, 3)), (1, 0)) == box((3, 0), (3, 3))
    src = box((2, 5), (6, 9))
    assert transition_set(src, src, (0, 0)) == src
    assert transition_set(box((0,), (3,)), box((10,), (12,)), (1,)) is None


def test_stay_set_examples():
    assert stay_set(box((0,), (4,)), (1,)) == box((0,), (3,))
    assert stay_set(box((0, 0), (3, 3)), (1, 1)) == box((0, 0), (2, 2))
    assert stay_set(box((0,), (0,)), (1,)) is None


def test_exit_counts():
    assert exit_count_and_rate_basis(box((0, 0), (3, 3)), (1, 1))[1] == 7
    assert exit_count_and_rate_basis(box((0,), (4,)), (1,))[1] == 1
    assert exit_count_and_rate_basis(box((0,), (4,)), (0,))[1] == 0


def test_transition_set_matches_enumeration(rng):
    for _ in range(300):
        lower = rng.integers(0, 10, size=2)
        src = box(lower, lower + rng.integers(0, 8, size=2))
        lower = rng.integers(0, 14, size=2)
        dst = box(lower, lower + rng.integers(0, 8, size=2))
        change = tuple(int(v) for v in rng.integers(-3, 4, size=2))
        result = transition_set(src, dst, change)
        members = set(result.micro_states()) if result is not None else set()
        expected = {
            x for x in src.micro_states()
            if dst.contains(tuple(a + v for a, v in zip(x, change)))
        }
        assert members == expected


def test_split_examples():
    assert split(box((0, 0), (15, 15))) == [
        box((0, 0), (7, 7)),
        box((0, 8), (7, 15)),
        box((8, 0), (15, 7)),
        box((8, 8), (15, 15)),
    ]
    assert split(box((0,), (0,))) == [box((0,), (0,))]
    assert split(box((0, 2), (7, 2)), frozenset({1})) == [box((0, 2), (3, 2)), box((4, 2), (7, 2))]


def test_split_partitions_odd_boxes():
    parent = box((1, 4, 0), (7, 8, 2))
    children = split(parent)
    assert sum(c.volume for c in children) == parent.volume
    members = [x for c in children for x in c.micro_states()]
    assert sorted(members) == sorted(parent.micro_states())
    assert {c.widths[0] for c in children} == {4, 3}


def test_initial_grid_examples():
    assert len(initial_grid((159, 159), 4)) == 100
    assert len(initial_grid((5, 2), 0)) == 18
    switch = initial_grid((79, 79, 1, 1, 1), 3, {2, 3, 4})
    assert len(switch) == 800
    assert all(s.widths[2:] == (1, 1, 1) for s in switch.states)


def test_initial_grid_narrow_last_tile():
    space = initial_grid((10,), 2)
    assert [(s.lower[0], s.upper[0]) for s in space.states] == [(0, 3), (4, 7), (8, 10)]


def test_initial_grid_covers_region_once():
    space = initial_grid((9, 6), 2)
    members = [x for s in space.states for x in s.micro_states()]
    assert sorted(members) == list(itertools.product(range(10), range(7)))


def test_overlapping_space_is_rejected():
    with pytest.raises(GeometryError):
        LumpedSpace(states=(box((0,), (3,)), box((2,), (5,))))


def test_lumped_unlumped_dimension_is_rejected():
    with pytest.raises(GeometryError):
        LumpedSpace(states=(box((0, 0), (3, 1)),), unlumped_dims=frozenset({1}))


def test_locate_and_refine():
    space = initial_grid((15, 15), 3)
    assert space.locate((9, 2)) == space.row_of(box((8, 0), (15, 7)))
    assert space.locate((16, 0)) == -1
    refined = refine_space(space, [space.locate((0, 0))])
    assert len(refined) == 4
    assert refined.micro_count == 64
    assert refined.locate((9, 2)) == -1


def test_spaces_compare_by_their_boxes():
    space = initial_grid((15, 15), 3)
    same = initial_grid((15, 15), 3)
    space.locate((9, 2))
    assert space.index.checks != same.index.checks
    assert space == same
    assert hash(space) == hash(same)
    assert space != initial_grid((15, 15), 2)
    column = (box((0, 0), (0, 1)),)
    assert LumpedSpace(states=column) != LumpedSpace(states=column, unlumped_dims=frozenset({0}))
