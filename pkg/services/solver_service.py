"""
Solver Service - forward and backward Kolmogorov equations on the time grid.

Both equations are integrated with scipy's OdeSolver classes stepped by hand
so that every grid time is read from the dense output of the step that
covers it. Backward solves run in reversed time s = T - t.
"""
import logging
from typing import Dict, Tuple
import numpy as np
from scipy import sparse
from scipy.integrate import BDF, DOP853, RK45, Radau
from config import IMPLICIT_METHODS, settings
from models.errors import NumericalError
from models.results import TimeGridSolution
from .generator_service import SparseGenerator

logger = logging.getLogger(__name__)

SOLVERS = {"BDF": BDF, "Radau": Radau, "RK45": RK45, "DOP853": DOP853}


def time_grid(horizon: float, points: int) -> np.ndarray:
    """K equispaced times on [0, T] with exact endpoints."""
    grid = np.linspace(0.0, horizon, points)
    grid[-1] = horizon
    return grid


def _integrate(
    matrix: sparse.spmatrix,
    start: np.ndarray,
    times: np.ndarray,
    rtol: float,
    atol: float,
    method: str,
) -> Tuple[np.ndarray, Dict[str, int]]:
    """Integrate y' = matrix @ y from times[0] and sample at every entry of times."""
    matrix = sparse.csc_matrix(matrix)
    out = np.empty((len(times), len(start)))
    out[0] = start

    def rhs(_t, y):
        return matrix @ y

    kwargs = {"rtol": rtol, "atol": atol}
    if method in IMPLICIT_METHODS:
        kwargs["jac"] = matrix
    solver = SOLVERS[method](rhs, times[0], start.astype(float), times[-1], **kwargs)

    k = 1
    steps = 0
    while k < len(times):
        message = solver.step()
        steps += 1
        if solver.status == "failed":
            raise NumericalError(f"integration failed: {message}", time=float(solver.t))
        dense = solver.dense_output()
        while k < len(times) and times[k] <= solver.t:
            out[k] = dense(times[k])
            k += 1
        if solver.status == "finished" and k < len(times):
            out[k:] = solver.y
            k = len(times)

    stats = {
        "steps": steps,
        "nfev": int(solver.nfev),
        "njev": int(getattr(solver, "njev", 0)),
        "nlu": int(getattr(solver, "nlu", 0)),
    }
    return out, stats


def solve_forward(
    generator: SparseGenerator,
    initial: np.ndarray,
    grid: np.ndarray,
    rtol: float = None,
    atol: float = None,
    method: str = None,
) -> TimeGridSolution:
    """pi(t_k) for dpi/dt = pi Q, started from `initial` (sink included)."""
    initial = np.asarray(initial, dtype=float)
    if initial.shape != (generator.dimension,):
        raise ValueError(f"initial vector has shape {initial.shape}, expected ({generator.dimension},)")
    values, stats = _integrate(
        generator.matrix.T,
        initial,
        grid,
        rtol or settings.rtol,
        atol or settings.atol,
        method or settings.method,
    )
    logger.debug("[Solver] forward %s", stats)
    return TimeGridSolution(grid=grid, values=values, stats=stats)


def solve_backward(
    generator: SparseGenerator,
    terminal: np.ndarray,
    grid: np.ndarray,
    rtol: float = None,
    atol: float = None,
    method: str = None,
) -> TimeGridSolution:
    """beta(t_k) for dbeta/dt = -Q beta with beta(T) = `terminal`; the sink entry stays 0."""
    terminal = np.asarray(terminal, dtype=float)
    if terminal.shape != (generator.dimension,):
        raise ValueError(f"terminal vector has shape {terminal.shape}, expected ({generator.dimension},)")
    horizon = grid[-1]
    reversed_times = horizon - grid[::-1]
    reversed_times[0] = 0.0
    values, stats = _integrate(
        generator.matrix,
        terminal,
        reversed_times,
        rtol or settings.rtol,
        atol or settings.atol,
        method or settings.method,
    )
    logger.debug("[Solver] backward %s", stats)
    return TimeGridSolution(grid=grid, values=values[::-1].copy(), stats=stats)

