"""
Generator Service - sparse lumped rate matrices with a sink state.
"""
import logging
from typing import Dict, Iterable
import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy import sparse
from config import ROW_SUM_TOLERANCE
from models.geometry import LumpedSpace
from models.network import ReactionNetwork
from .geometry_service import transition_set
from .rate_service import exit_rate, lumped_rate

logger = logging.getLogger(__name__)


class SparseGenerator(BaseModel):
    """Rate matrix over macro-states plus one absorbing sink (last row/column)."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    matrix: sparse.csr_matrix
    space: LumpedSpace
    stats: Dict[str, int] = {}

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def sink_row(self) -> int:
        return self.dimension - 1

    def row_sums(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=1)).ravel()

    def to_coordinate_text(self) -> str:
        """One `row col rate` line per stored entry, row-major."""
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return "".join(
            f"{coo.row[k]} {coo.col[k]} {float(coo.data[k])!r}\n" for k in order
        )


def assemble(space: LumpedSpace, network: ReactionNetwork) -> SparseGenerator:
    """Build the lumped generator: off-diagonals from transition sets, the
    unmatched part of each exit rate to the sink, diagonals closing the rows."""
    n = len(space)
    sink = space.sink_row
    checks_before = space.index.checks
    changes = [(reaction, reaction.change) for reaction in network.reactions]
    rows, cols, vals = [], [], []

    for i, box in enumerate(space.states):
        vol = box.volume
        outflow = 0.0
        sink_rate = 0.0
        for reaction, change in changes:
            if not any(change):
                continue
            leaving = exit_rate(reaction, box, change) / vol
            if leaving <= 0.0:
                continue
            shifted_lower = tuple(l + v for l, v in zip(box.lower, change))
            shifted_upper = tuple(u + v for u, v in zip(box.upper, change))
            matched = 0.0
            for k in space.index.query(shifted_lower, shifted_upper):
                if k == i:
                    continue
                rate = lumped_rate(reaction, transition_set(box, space.states[k], change)) / vol
                if rate > 0.0:
                    rows.append(i)
                    cols.append(k)
                    vals.append(rate)
                    matched += rate
            outflow += matched
            lost = leaving - matched
            if lost > ROW_SUM_TOLERANCE * leaving:
                sink_rate += lost
        if sink_rate > 0.0:
            rows.append(i)
            cols.append(sink)
            vals.append(sink_rate)
        diagonal = -(outflow + sink_rate)
        if diagonal != 0.0:
            rows.append(i)
            cols.append(i)
            vals.append(diagonal)

    matrix = sparse.csr_matrix((vals, (rows, cols)), shape=(n + 1, n + 1))
    matrix.sum_duplicates()
    stats = {
        "boxes": n,
        "reactions": len(network.reactions),
        "nonzeros": int(matrix.nnz),
        "candidate_checks": space.index.checks - checks_before,
    }
    logger.debug("[Generator] assembled %s", stats)
    return SparseGenerator(matrix=matrix, space=space, stats=stats)


def make_absorbing(generator: SparseGenerator, goal_rows: Iterable[int]) -> SparseGenerator:
    """Zero all outgoing rates (and diagonals) of the goal rows."""
    keep = np.ones(generator.dimension)
    keep[list(goal_rows)] = 0.0
    matrix = sparse.diags(keep).dot(generator.matrix).tocsr()
    matrix.eliminate_zeros()
    return SparseGenerator(matrix=matrix, space=generator.space, stats=generator.stats)
