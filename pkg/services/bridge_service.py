"""
Bridge Service - bridging distributions and the iterative refinement loop.

Each iteration solves the forward and backward equations on the current
lumped space, forms the approximate bridging distribution, keeps and splits
every box whose bridging probability reaches delta at some grid time and
drops the rest. The loop ends with a solve at micro granularity.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Iterable, List, Sequence, Set, Tuple
import numpy as np
from scipy.integrate import trapezoid
from config import ATOL_ATTEMPTS, ATOL_FLOOR, ATOL_RESOLUTION, ATOL_SHRINK, settings
from models.document import (
    Interval,
    ModelDocument,
    ObservationTerminal,
    PointTerminal,
    Predicate,
    PredicateTerminal,
)
from models.errors import ModelValidationError, UnreachableTerminalError
from models.geometry import LumpedSpace, MacroState
from models.results import (
    BridgingSolution,
    IterationRecord,
    RareEventResult,
    RefinementTrace,
    TimeGridSolution,
)
from .generator_service import SparseGenerator, assemble, make_absorbing
from .geometry_service import initial_grid, intersect, refine_space
from .observation_service import box_likelihood
from .solver_service import solve_backward, solve_forward, time_grid

logger = logging.getLogger(__name__)

State = Tuple[int, ...]
UNCONSTRAINED = Interval()


# ==================== ENDPOINT VECTORS ====================

def lump_initial(space: LumpedSpace, document: ModelDocument) -> np.ndarray:
    """Initial mass per box (sink entry last)."""
    vector = np.zeros(len(space) + 1)
    for state, probability in document.initial.distribution().items():
        row = space.locate(state)
        if row < 0:
            raise ModelValidationError(f"initial state {state} lies outside the truncation")
        vector[row] += probability
    return vector


def predicate_fraction(box: MacroState, predicate: Predicate) -> float:
    """Share of the box's micro-states satisfying the predicate."""
    if len(predicate.clauses) == 1:
        clause = predicate.clauses[0]
        upper = tuple(b if iv.upper is None else iv.upper for iv, b in zip(clause, box.upper))
        overlap = intersect(box.lower, box.upper, tuple(iv.lower for iv in clause), upper)
        if overlap is None:
            return 0.0
        return math.prod(u - l + 1 for l, u in zip(*overlap)) / box.volume
    axes = np.meshgrid(
        *(np.arange(l, u + 1) for l, u in zip(box.lower, box.upper)), indexing="ij"
    )
    satisfied = np.zeros(axes[0].shape, dtype=bool)
    for clause in predicate.clauses:
        inside = np.ones(axes[0].shape, dtype=bool)
        for axis, iv in zip(axes, clause):
            inside &= axis >= iv.lower
            if iv.upper is not None:
                inside &= axis <= iv.upper
        satisfied |= inside
    return float(satisfied.mean())


def terminal_weights(space: LumpedSpace, document: ModelDocument) -> np.ndarray:
    """Average micro-level terminal weight per box (sink weight 0)."""
    vector = np.zeros(len(space) + 1)
    terminal = document.terminal
    if isinstance(terminal, PointTerminal):
        row = space.locate(terminal.state)
        if row >= 0:
            vector[row] = 1.0 / space.states[row].volume
    elif isinstance(terminal, PredicateTerminal):
        for row, box in enumerate(space.states):
            vector[row] = predicate_fraction(box, terminal.predicate)
    elif isinstance(terminal, ObservationTerminal):
        vector[:-1] = box_likelihood(space, terminal.observation)
    return vector


def endpoint_states(document: ModelDocument) -> Tuple[State, ...]:
    """Micro-states of the initial support and of a point goal."""
    states = [s for s, p in document.initial.distribution().items() if p > 0]
    if isinstance(document.terminal, PointTerminal):
        states.append(document.terminal.state)
    return tuple(dict.fromkeys(states))


def resolve_bounds(document: ModelDocument) -> Tuple[int, ...]:
    """Declared bounds, or twice the largest endpoint coordinate rounded up to whole tiles."""
    options = document.options
    if options.bounds is not None:
        return options.bounds
    n = document.network.n_species
    extent = [0] * n
    coordinates = list(endpoint_states(document))
    terminal = document.terminal
    if isinstance(terminal, PredicateTerminal):
        coordinates.extend(
            tuple(iv.lower if iv.upper is None else iv.upper for iv in clause)
            for clause in terminal.predicate.clauses
        )
    for state in coordinates:
        extent = [max(e, x) for e, x in zip(extent, state)]
    if isinstance(terminal, ObservationTerminal):
        dim = terminal.observation.species
        extent[dim] = max(extent[dim], terminal.observation.total)
    side = 2 ** options.grid_exponent
    bounds = []
    for dim, e in enumerate(extent):
        if dim in options.unlumped_dims:
            bounds.append(e)
        else:
            bounds.append(-(-(2 * e + 1) // side) * side - 1)
    return tuple(bounds)


def _note_out_of_bounds(document: ModelDocument, bounds: Sequence[int], trace: RefinementTrace) -> None:
    terminal = document.terminal
    if not isinstance(terminal, PredicateTerminal):
        return
    for clause in terminal.predicate.clauses:
        reaches_inside = all(iv.lower <= b for iv, b in zip(clause, bounds))
        leaves = any(
            iv != UNCONSTRAINED and (iv.upper is None or iv.upper > b) for iv, b in zip(clause, bounds)
        )
        if reaches_inside and leaves:
            note = (
                f"terminal predicate {terminal.predicate.source!r} extends beyond bounds {tuple(bounds)}; "
                "goal states outside the bounds are ignored, the result remains a lower bound"
            )
            logger.warning("[Refine] %s", note)
            trace.notes.append(note)
            return


# ==================== BRIDGING ====================

def bridging_distribution(
    space: LumpedSpace,
    forward: TimeGridSolution,
    backward: TimeGridSolution,
    normalizer: float,
    endpoints: Tuple[State, ...] = (),
) -> BridgingSolution:
    """gamma = pi * beta / normalizer at every grid time, sink excluded."""
    if not normalizer > 0.0:
        raise UnreachableTerminalError(
            "terminal event numerically unreachable", sink_mass=float(forward.values[-1, -1])
        )
    gamma = forward.clamped()[:, :-1] * backward.clamped()[:, :-1] / normalizer
    return BridgingSolution(
        space=space,
        grid=forward.grid,
        gamma=gamma,
        normalizer=normalizer,
        forward=forward,
        backward=backward,
        endpoint_states=endpoints,
    )


def _solve_pair(
    generator: SparseGenerator,
    initial: np.ndarray,
    terminal: np.ndarray,
    grid: np.ndarray,
    document: ModelDocument,
    atol: float,
) -> Tuple[TimeGridSolution, TimeGridSolution]:
    options = document.options
    tolerances = {"rtol": options.rtol, "atol": atol, "method": options.method}
    if settings.threads > 1:
        with ThreadPoolExecutor(max_workers=2) as pool:
            forward = pool.submit(solve_forward, generator, initial, grid, **tolerances)
            backward = pool.submit(solve_backward, generator, terminal, grid, **tolerances)
            return forward.result(), backward.result()
    return (
        solve_forward(generator, initial, grid, **tolerances),
        solve_backward(generator, terminal, grid, **tolerances),
    )


def _resolved(normalizer: float, evidence: float, atol: float) -> bool:
    """Both estimates positive, in agreement, and well above the absolute tolerance."""
    low, high = sorted((normalizer, evidence))
    return low > 0.0 and atol <= ATOL_RESOLUTION * low and high - low <= 0.5 * high


def _solve_resolved(
    generator: SparseGenerator,
    initial: np.ndarray,
    terminal: np.ndarray,
    grid: np.ndarray,
    document: ModelDocument,
    atol: float,
) -> Tuple[TimeGridSolution, TimeGridSolution, float, float, float]:
    """Solve both directions, shrinking atol until it resolves the bridging mass.

    Returns forward, backward, normalizer, forward evidence and the atol used.
    """
    for _ in range(ATOL_ATTEMPTS):
        forward, backward = _solve_pair(generator, initial, terminal, grid, document, atol)
        normalizer = float(initial @ backward.clamped()[0])
        evidence = float(forward.clamped()[-1] @ terminal)
        if _resolved(normalizer, evidence, atol) or atol <= ATOL_FLOOR:
            break
        low = min(normalizer, evidence)
        if low > 0.0:
            target = ATOL_RESOLUTION * ATOL_SHRINK * low
            if max(normalizer, evidence) - low > 0.5 * max(normalizer, evidence):
                target *= ATOL_SHRINK ** 2
            next_atol = min(atol * ATOL_SHRINK, target)
        else:
            next_atol = atol * 1e-30
        next_atol = max(next_atol, ATOL_FLOOR)
        logger.info(
            "[Refine] atol %.3g does not resolve normalizer %.3g / evidence %.3g, retrying with %.3g",
            atol, normalizer, evidence, next_atol,
        )
        atol = next_atol
    return forward, backward, normalizer, evidence, atol


def build_generator(space: LumpedSpace, document: ModelDocument) -> SparseGenerator:
    """Lumped generator, with the goal made absorbing in first-passage mode."""
    generator = assemble(space, document.network)
    if document.first_passage:
        row = space.locate(document.terminal.state)
        if row >= 0:
            generator = make_absorbing(generator, [row])
    return generator


def refine(
    document: ModelDocument, keep_generator: bool = False
) -> Tuple[BridgingSolution, RefinementTrace]:
    """Iterative refinement from 2^m boxes down to micro-states.

    Returns the micro-granularity bridging solution and the trace. With
    keep_generator the final generator is kept on the trace for dumping.
    """
    options = document.options
    bounds = resolve_bounds(document)
    space = initial_grid(bounds, options.grid_exponent, options.unlumped_dims)
    grid = time_grid(document.horizon, options.time_points)
    endpoints = endpoint_states(document)
    trace = RefinementTrace()
    _note_out_of_bounds(document, bounds, trace)
    logger.info(
        "[Refine] %d boxes of side %d on bounds %s, delta=%g",
        len(space), 2 ** options.grid_exponent, bounds, options.delta,
    )

    iteration = 0
    atol = options.atol
    while True:
        generator = build_generator(space, document)
        initial = lump_initial(space, document)
        terminal = terminal_weights(space, document)
        forward, backward, normalizer, evidence, atol = _solve_resolved(
            generator, initial, terminal, grid, document, atol
        )
        sink_mass = float(forward.values[-1, -1])
        trace.snapshots.append([(box.lower, box.upper) for box in space.states])
        final = space.is_micro()

        if not normalizer > 0.0:
            trace.records.append(
                IterationRecord(
                    iteration=iteration, boxes=len(space), micro_states=space.micro_count,
                    retained=0, truncated=len(space), normalizer=normalizer,
                    forward_evidence=evidence, sink_mass=sink_mass, max_gamma=0.0, atol=atol,
                    solver={"forward": forward.stats, "backward": backward.stats},
                )
            )
            raise UnreachableTerminalError(
                f"terminal event unreachable on the truncation at iteration {iteration}; "
                "raise the bounds or lower delta",
                sink_mass=sink_mass,
                max_gamma=0.0,
                trace=trace,
            )

        bridging = bridging_distribution(space, forward, backward, normalizer, endpoints)
        peak = bridging.gamma.max(axis=0)
        keep = _retained_rows(space, peak, options.delta, endpoints)
        trace.records.append(
            IterationRecord(
                iteration=iteration,
                boxes=len(space),
                micro_states=space.micro_count,
                retained=len(space) if final else len(keep),
                truncated=0 if final else len(space) - len(keep),
                normalizer=normalizer,
                forward_evidence=evidence,
                sink_mass=sink_mass,
                max_gamma=float(peak.max()) if len(peak) else 0.0,
                atol=atol,
                solver={"forward": forward.stats, "backward": backward.stats},
            )
        )
        logger.info(
            "[Refine] iteration %d: %d boxes (%d states), normalizer %.6g, sink %.3g, keep %d",
            iteration, len(space), space.micro_count, normalizer, sink_mass,
            len(space) if final else len(keep),
        )
        if final:
            if keep_generator:
                trace.generator = generator
            return bridging, trace
        space = refine_space(space, keep)
        iteration += 1


def _retained_rows(
    space: LumpedSpace, peak: np.ndarray, delta: float, endpoints: Iterable[State]
) -> List[int]:
    keep: Set[int] = set(np.flatnonzero(peak >= delta).tolist())
    for state in endpoints:
        row = space.locate(state)
        if row >= 0:
            keep.add(row)
    return sorted(keep)


# ==================== QUERIES ====================

def rare_event_bound(document: ModelDocument) -> RareEventResult:
    """Lower bound on Pr(X_T satisfies the predicate) from the micro-level backward solution."""
    if not isinstance(document.terminal, PredicateTerminal):
        raise ModelValidationError("rare-event bounds need a predicate terminal")
    try:
        bridging, trace = refine(document)
    except UnreachableTerminalError as exc:
        logger.warning("[Refine] terminal predicate unreachable; bound is 0")
        return RareEventResult(bound=0.0, trace=exc.trace or RefinementTrace(), reachable=False)
    return RareEventResult(bound=bridging.normalizer, trace=trace)


def occupation_time(bridging: BridgingSolution, exclude_endpoints: bool = True) -> Dict[State, float]:
    """Expected time spent in each state over [0, T] under the bridge (trapezoidal rule)."""
    totals = trapezoid(bridging.gamma, bridging.grid, axis=0)
    excluded = set(bridging.endpoint_states) if exclude_endpoints else set()
    return {
        box.lower: float(value)
        for box, value in zip(bridging.space.states, totals)
        if box.lower not in excluded or box.volume > 1
    }


def marginal_over_time(bridging: BridgingSolution, dims: Sequence[int]) -> Dict[State, np.ndarray]:
    """Bridging probability of every value combination of `dims` over the grid."""
    marginals: Dict[State, np.ndarray] = {}
    for row, box in enumerate(bridging.space.states):
        if any(box.lower[d] != box.upper[d] for d in dims):
            raise ValueError(f"dimension(s) {tuple(dims)} are lumped in box {box}")
        key = tuple(box.lower[d] for d in dims)
        if key not in marginals:
            marginals[key] = np.zeros(len(bridging.grid))
        marginals[key] += bridging.gamma[:, row]
    return dict(sorted(marginals.items()))

