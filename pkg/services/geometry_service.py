"""
Geometry Service - integer box algebra for macro-states.
"""
import itertools
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple
from models.geometry import LumpedSpace, MacroState

Vector = Sequence[int]


def volume(state: MacroState) -> int:
    """Number of micro-states in the box."""
    return state.volume


def intersect(
    lower_a: Vector, upper_a: Vector, lower_b: Vector, upper_b: Vector
) -> Optional[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    lower = tuple(max(a, b) for a, b in zip(lower_a, lower_b))
    upper = tuple(min(a, b) for a, b in zip(upper_a, upper_b))
    if any(l > u for l, u in zip(lower, upper)):
        return None
    return lower, upper


def transition_set(src: MacroState, dst: MacroState, change: Vector) -> Optional[MacroState]:
    """Members of src whose successor under `change` lies in dst: ((src + v) & dst) - v."""
    shifted_lower = tuple(l + v for l, v in zip(src.lower, change))
    shifted_upper = tuple(u + v for u, v in zip(src.upper, change))
    overlap = intersect(shifted_lower, shifted_upper, dst.lower, dst.upper)
    if overlap is None:
        return None
    lower, upper = overlap
    return MacroState.of(
        (l - v for l, v in zip(lower, change)),
        (u - v for u, v in zip(upper, change)),
    )


def stay_set(state: MacroState, change: Vector) -> Optional[MacroState]:
    """Members of the box whose successor stays inside it."""
    return transition_set(state, state, change)


def exit_count_and_rate_basis(state: MacroState, change: Vector) -> Tuple[Optional[MacroState], int]:
    """Stay set of the box and the number of micro-states leaving it under `change`.

    The exit region is generally not a box, so it is only ever handled as
    the complement of the returned stay set.
    """
    staying = stay_set(state, change)
    return staying, state.volume - (staying.volume if staying is not None else 0)


def split(state: MacroState, unlumped_dims: FrozenSet[int] = frozenset()) -> List[MacroState]:
    """Halve every lumped dimension of width > 1 (ceil/floor for odd widths)."""
    pieces = []
    for dim, (lower, upper) in enumerate(zip(state.lower, state.upper)):
        width = upper - lower + 1
        if width <= 1 or dim in unlumped_dims:
            pieces.append(((lower, upper),))
            continue
        head = (width + 1) // 2
        pieces.append(((lower, lower + head - 1), (lower + head, upper)))
    return [
        MacroState.of((p[0] for p in combo), (p[1] for p in combo))
        for combo in itertools.product(*pieces)
    ]


def _tiles(bound: int, side: int) -> List[Tuple[int, int]]:
    return [(start, min(start + side - 1, bound)) for start in range(0, bound + 1, side)]


def initial_grid(bounds: Vector, grid_exponent: int, unlumped_dims: Iterable[int] = ()) -> LumpedSpace:
    """Tile prod [0, bounds_l] by boxes of side 2^m (side 1 in unlumped dims)."""
    unlumped = frozenset(unlumped_dims)
    side = 2 ** grid_exponent
    per_dim = [
        _tiles(bound, 1 if dim in unlumped else side) for dim, bound in enumerate(bounds)
    ]
    states = tuple(
        MacroState.of((t[0] for t in combo), (t[1] for t in combo))
        for combo in itertools.product(*per_dim)
    )
    return LumpedSpace(states=states, unlumped_dims=unlumped)


def refine_space(space: LumpedSpace, keep: Iterable[int]) -> LumpedSpace:
    """Split the kept boxes (in row order) and drop the rest."""
    children = []
    for row in sorted(set(keep)):
        children.extend(split(space.states[row], space.unlumped_dims))
    return LumpedSpace(states=tuple(children), unlumped_dims=space.unlumped_dims)
