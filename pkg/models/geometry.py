"""
Macro-states (integer boxes) and lumped state spaces.
"""
import itertools
import math
from typing import Dict, FrozenSet, Iterable, List, Tuple
from pydantic import BaseModel, ConfigDict, PrivateAttr, model_validator
from .errors import GeometryError


class MacroState(BaseModel):
    """All micro-states x with lower <= x <= upper elementwise."""
    model_config = ConfigDict(frozen=True)

    lower: Tuple[int, ...]
    upper: Tuple[int, ...]

    @model_validator(mode="after")
    def check_corners(self):
        if len(self.lower) != len(self.upper):
            raise ValueError("corner dimensions differ")
        if any(l < 0 for l in self.lower):
            raise ValueError(f"negative lower corner {self.lower}")
        if any(l > u for l, u in zip(self.lower, self.upper)):
            raise ValueError(f"empty box {self.lower}..{self.upper}")
        return self

    @classmethod
    def of(cls, lower: Iterable[int], upper: Iterable[int]) -> "MacroState":
        """Unchecked constructor for corners already known to be valid."""
        return cls.model_construct(lower=tuple(lower), upper=tuple(upper))

    @classmethod
    def point(cls, state: Iterable[int]) -> "MacroState":
        state = tuple(state)
        return cls(lower=state, upper=state)

    @property
    def widths(self) -> Tuple[int, ...]:
        return tuple(u - l + 1 for l, u in zip(self.lower, self.upper))

    @property
    def volume(self) -> int:
        return math.prod(self.widths)

    def contains(self, state: Iterable[int]) -> bool:
        return all(l <= x <= u for x, l, u in zip(state, self.lower, self.upper))

    def micro_states(self) -> Iterable[Tuple[int, ...]]:
        """Enumerate members in lexicographic order."""
        return itertools.product(*(range(l, u + 1) for l, u in zip(self.lower, self.upper)))

    def __str__(self) -> str:
        return "x".join(f"[{l},{u}]" for l, u in zip(self.lower, self.upper))


class BoxIndex:
    """Hash grid over box lower corners for overlap queries.

    Cells have the largest box width per dimension, so every box touches at
    most two cells per dimension and a query only inspects nearby boxes.
    """

    def __init__(self, states: Tuple[MacroState, ...]):
        dims = len(states[0].lower) if states else 0
        self.cell = tuple(max(s.upper[d] - s.lower[d] + 1 for s in states) for d in range(dims))
        self.checks = 0
        self._states = states
        self._cells: Dict[Tuple[int, ...], List[int]] = {}
        for row, state in enumerate(states):
            for key in self._keys(state.lower, state.upper):
                self._cells.setdefault(key, []).append(row)

    def _keys(self, lower, upper):
        ranges = (
            range(l // c, u // c + 1) for l, u, c in zip(lower, upper, self.cell)
        )
        return itertools.product(*ranges)

    def query(self, lower: Tuple[int, ...], upper: Tuple[int, ...]) -> List[int]:
        """Rows of all boxes intersecting [lower, upper] (corners may be negative)."""
        if not self._states:
            return []
        lower = tuple(max(l, 0) for l in lower)
        if any(l > u for l, u in zip(lower, upper)):
            return []
        found = set()
        for key in self._keys(lower, upper):
            for row in self._cells.get(key, ()):
                if row in found:
                    continue
                self.checks += 1
                box = self._states[row]
                if all(bl <= u and l <= bu for l, u, bl, bu in zip(lower, upper, box.lower, box.upper)):
                    found.add(row)
        return sorted(found)


class LumpedSpace(BaseModel):
    """Pairwise disjoint macro-states; the sink is implicit (row len(states))."""
    model_config = ConfigDict(frozen=True)

    states: Tuple[MacroState, ...]
    unlumped_dims: FrozenSet[int] = frozenset()

    _index: BoxIndex = PrivateAttr()
    _rows: Dict[MacroState, int] = PrivateAttr()

    def model_post_init(self, __context) -> None:
        for state in self.states:
            for dim in self.unlumped_dims:
                if state.upper[dim] != state.lower[dim]:
                    raise GeometryError(f"box {state} is lumped in unlumped dimension {dim}")
        self._index = BoxIndex(self.states)
        self._rows = {state: row for row, state in enumerate(self.states)}
        if len(self._rows) != len(self.states):
            raise GeometryError("duplicate macro-states")
        for row, state in enumerate(self.states):
            if self._index.query(state.lower, state.upper) != [row]:
                raise GeometryError(f"macro-state {state} overlaps another macro-state")
        self._index.checks = 0

    def __len__(self) -> int:
        return len(self.states)

    def __eq__(self, other) -> bool:
        # the box index is derived state
        if not isinstance(other, LumpedSpace):
            return NotImplemented
        return self.states == other.states and self.unlumped_dims == other.unlumped_dims

    def __hash__(self) -> int:
        return hash((self.states, self.unlumped_dims))

    @property
    def index(self) -> BoxIndex:
        return self._index

    @property
    def sink_row(self) -> int:
        return len(self.states)

    @property
    def n_species(self) -> int:
        return len(self.states[0].lower) if self.states else 0

    @property
    def micro_count(self) -> int:
        return sum(state.volume for state in self.states)

    def row_of(self, state: MacroState) -> int:
        return self._rows[state]

    def locate(self, micro: Tuple[int, ...]) -> int:
        """Row of the box holding a micro-state, or -1 when truncated."""
        rows = self._index.query(tuple(micro), tuple(micro))
        return rows[0] if rows else -1

    def is_micro(self) -> bool:
        return all(state.volume == 1 for state in self.states)
