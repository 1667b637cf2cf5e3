"""Mixed-integer LP by branch and bound over bounded-simplex relaxations.

Node selection is best-bound first; branching picks the most fractional
binary (closest to one half), lowest index on ties.  No cutting planes
and no presolve beyond fixing branched bounds, which is enough for the
desk-scale unit-commitment instances this package targets.
"""

import heapq
import time
from dataclasses import dataclass

import numpy as np

from adol.lp import (
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    DimensionMismatch,
    LinearProgram,
    SolverOptions,
    dump_lp,
    solve_lp,
)

GAP_LIMIT = "gap_limit"


@dataclass
class MixedIntegerProgram:
    """An LP plus a set of column indices restricted to {0, 1}."""

    base: LinearProgram
    binary_vars: frozenset

    def __post_init__(self):
        self.binary_vars = frozenset(int(j) for j in self.binary_vars)

    def validate(self):
        self.base.validate()
        n = self.base.num_vars
        for j in self.binary_vars:
            if not 0 <= j < n:
                raise DimensionMismatch(f"binary index {j} out of range")
            if self.base.var_lower[j] < -1e-12 or self.base.var_upper[j] > 1 + 1e-12:
                raise DimensionMismatch(f"binary column {j} has bounds outside [0, 1]")


@dataclass
class MilpSolution:
    """Best incumbent found.  status is "optimal", "infeasible", or
    "gap_limit" (budget exhausted; gap reports the remaining relative
    bound gap, inf when no incumbent exists)."""

    status: str
    primal: np.ndarray = None
    objective: float = np.nan
    gap: float = np.nan
    nodes_explored: int = 0


def _relative_gap(incumbent, bound):
    if incumbent is None:
        return np.inf
    return max(0.0, (incumbent - bound) / max(1.0, abs(incumbent)))


def solve_milp(mip, opts=None):
    """Branch-and-bound minimization of a MixedIntegerProgram.

    Children are solved as they are created and enqueued keyed by their
    own relaxation value, so the heap top is always a valid global lower
    bound.  Terminates when the relative gap drops below opts.gap_tol,
    or when the node/time budget runs out (status "gap_limit" with the
    best incumbent).  Deterministic under fixed options.
    """
    if opts is None:
        opts = SolverOptions()
    mip.validate()
    base = mip.base
    bin_idx = np.array(sorted(mip.binary_vars), dtype=int)

    def relax(lo, hi):
        return solve_lp(
            LinearProgram(
                base.objective_coeffs,
                base.constraint_matrix,
                base.constraint_rhs,
                base.constraint_sense,
                lo,
                hi,
            ),
            opts,
        )

    t0 = time.monotonic()
    nodes = 0
    root = relax(base.var_lower, base.var_upper)
    nodes += 1
    if root.status == INFEASIBLE:
        return MilpSolution(INFEASIBLE, nodes_explored=nodes)
    if root.status == UNBOUNDED:
        raise ValueError("relaxation is unbounded; model the bounds explicitly")

    if bin_idx.size == 0:
        return MilpSolution(OPTIMAL, root.primal, root.objective, 0.0, nodes)

    heap = []
    counter = 0
    heapq.heappush(
        heap, (root.objective, counter, root, base.var_lower, base.var_upper)
    )
    incumbent = None
    inc_obj = None

    def out_of_budget():
        if nodes >= opts.node_limit:
            return True
        if opts.time_limit is not None and time.monotonic() - t0 > opts.time_limit:
            return True
        return False

    while heap:
        bound, _, sol, lo, hi = heapq.heappop(heap)
        if inc_obj is not None:
            gap = _relative_gap(inc_obj, bound)
            if gap <= opts.gap_tol:
                return MilpSolution(OPTIMAL, incumbent, inc_obj, gap, nodes)

        frac = sol.primal[bin_idx]
        dist = np.abs(frac - np.round(frac))
        fractional = dist > opts.int_tol
        if not fractional.any():
            if inc_obj is None or sol.objective < inc_obj:
                incumbent, inc_obj = sol.primal, sol.objective
            continue

        score = np.where(fractional, np.abs(frac - 0.5), np.inf)
        branch_col = int(bin_idx[int(np.argmin(score))])

        for value in (0.0, 1.0):
            if out_of_budget():
                bound_left = min([bound] + [h[0] for h in heap]) if heap else bound
                return MilpSolution(
                    GAP_LIMIT, incumbent,
                    inc_obj if inc_obj is not None else np.nan,
                    _relative_gap(inc_obj, bound_left), nodes,
                )
            child_lo = lo.copy()
            child_hi = hi.copy()
            child_lo[branch_col] = value
            child_hi[branch_col] = value
            child = relax(child_lo, child_hi)
            nodes += 1
            if child.status != OPTIMAL:
                continue
            if inc_obj is not None and child.objective >= inc_obj - 1e-9 * max(
                1.0, abs(inc_obj)
            ):
                continue
            counter += 1
            heapq.heappush(
                heap, (child.objective, counter, child, child_lo, child_hi)
            )

    if incumbent is None:
        return MilpSolution(INFEASIBLE, nodes_explored=nodes)
    return MilpSolution(OPTIMAL, incumbent, inc_obj, 0.0, nodes)


def dump_mip(mip, path):
    """Debug dump sharing the LP layout plus a BINARIES section."""
    dump_lp(mip.base, path, binary_vars=mip.binary_vars)
