"""Dense linear programming with a bounded-variable primal simplex.

Solves  min c @ x  subject to  A x {<=, =, >=} b  and  lb <= x <= ub
(bounds may be infinite).  All problems here are minimizations.

The implementation favors robustness over speed: a two-phase start with
artificial variables, an explicit basis inverse with periodic
refactorization, and Bland's rule as an anti-cycling fallback once a
streak of degenerate pivots is detected.  Intended for the small dense
dispatch problems in this package (tens to a few thousand variables),
not for large-scale LP.
"""

from dataclasses import dataclass, field

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

LE = "<="
EQ = "="
GE = ">="
_SENSES = (LE, EQ, GE)


class DimensionMismatch(ValueError):
    """Objective, matrix, rhs, sense, or bound lengths disagree."""


class IterationLimit(RuntimeError):
    """Pivot budget exhausted; signals numerical trouble, never a silent
    wrong answer."""


@dataclass
class SolverOptions:
    """Numerical knobs shared by the LP and branch-and-bound solvers.

    feas_tol / opt_tol are absolute on normalized data; pivot_tol guards
    ratio-test denominators.  bland_after is the degenerate-pivot streak
    that triggers the switch to Bland's rule.  The int_/gap_/node_/
    time_ fields are only read by the MILP layer.
    """

    feas_tol: float = 1e-7
    opt_tol: float = 1e-7
    pivot_tol: float = 1e-9
    max_iter: int = 50_000
    bland_after: int = 40
    refactor_every: int = 100
    int_tol: float = 1e-6
    gap_tol: float = 1e-6
    node_limit: int = 1_000_000
    time_limit: float | None = None


@dataclass
class LinearProgram:
    """A dense LP in row form: min c@x, A x {<=,=,>=} b, lb <= x <= ub."""

    objective_coeffs: np.ndarray
    constraint_matrix: np.ndarray
    constraint_rhs: np.ndarray
    constraint_sense: list
    var_lower: np.ndarray
    var_upper: np.ndarray

    def __post_init__(self):
        self.objective_coeffs = np.asarray(self.objective_coeffs, dtype=float)
        self.constraint_matrix = np.atleast_2d(
            np.asarray(self.constraint_matrix, dtype=float)
        )
        self.constraint_rhs = np.asarray(self.constraint_rhs, dtype=float)
        self.constraint_sense = list(self.constraint_sense)
        self.var_lower = np.asarray(self.var_lower, dtype=float)
        self.var_upper = np.asarray(self.var_upper, dtype=float)
        if self.constraint_matrix.size == 0:
            self.constraint_matrix = self.constraint_matrix.reshape(
                0, self.objective_coeffs.size
            )

    @property
    def num_vars(self):
        return self.objective_coeffs.size

    @property
    def num_rows(self):
        return self.constraint_matrix.shape[0]

    def validate(self):
        n = self.num_vars
        m, cols = self.constraint_matrix.shape
        if cols != n:
            raise DimensionMismatch(f"matrix has {cols} columns for {n} variables")
        if self.constraint_rhs.size != m or len(self.constraint_sense) != m:
            raise DimensionMismatch("rhs/sense length differs from row count")
        if self.var_lower.size != n or self.var_upper.size != n:
            raise DimensionMismatch("bound length differs from variable count")
        for s in self.constraint_sense:
            if s not in _SENSES:
                raise DimensionMismatch(f"unknown constraint sense {s!r}")
        if not np.all(np.isfinite(self.objective_coeffs)):
            raise DimensionMismatch("objective coefficients must be finite")
        if np.any(self.var_lower > self.var_upper):
            raise DimensionMismatch("some var_lower exceeds var_upper")


@dataclass
class LpSolution:
    """Solver result.  primal/objective/duals are meaningful only when
    status == OPTIMAL; duals has one entry per constraint row."""

    status: str
    primal: np.ndarray = None
    objective: float = np.nan
    duals: np.ndarray = None
    iterations: int = 0


class _Tableau:
    """Bounded-variable simplex state over the slack-augmented system
    A_full x = b with lb <= x <= ub."""

    def __init__(self, A, b, lb, ub, opts):
        self.A = A
        self.b = b
        self.lb = lb
        self.ub = ub
        self.opts = opts
        self.m, self.N = A.shape
        self.basis = None       # column index per row
        self.xval = None        # values of all columns; basic entries mirrored
        self.Binv = None
        self.iterations = 0

    def set_basis(self, basis, nonbasic_values):
        self.basis = np.asarray(basis, dtype=int).copy()
        self.xval = nonbasic_values.copy()
        self.refactor()

    def refactor(self):
        B = self.A[:, self.basis]
        self.Binv = np.linalg.inv(B)
        self.recompute_basics()

    def recompute_basics(self):
        mask = np.ones(self.N, dtype=bool)
        mask[self.basis] = False
        rhs = self.b - self.A[:, mask] @ self.xval[mask]
        self.xval[self.basis] = self.Binv @ rhs

    def duals(self, c):
        return c[self.basis] @ self.Binv

    def solution(self):
        return self.xval.copy()

    def run(self, c, max_iter):
        """Minimize c over the current basis.  Returns OPTIMAL or
        UNBOUNDED; raises IterationLimit."""
        opts = self.opts
        degenerate_streak = 0
        bland = False
        since_refactor = 0
        while True:
            if self.iterations >= max_iter:
                raise IterationLimit(f"simplex exceeded {max_iter} pivots")
            self.iterations += 1
            since_refactor += 1
            if since_refactor >= opts.refactor_every:
                self.refactor()
                since_refactor = 0

            y = c[self.basis] @ self.Binv
            d = c - y @ self.A
            d[self.basis] = 0.0

            nonbasic = np.ones(self.N, dtype=bool)
            nonbasic[self.basis] = False
            room_up = self.ub - self.xval
            room_down = self.xval - self.lb
            can_up = nonbasic & (d < -opts.opt_tol) & (room_up > opts.pivot_tol)
            can_down = nonbasic & (d > opts.opt_tol) & (room_down > opts.pivot_tol)
            if not (can_up.any() or can_down.any()):
                return OPTIMAL

            if bland:
                idx_up = np.flatnonzero(can_up)
                idx_down = np.flatnonzero(can_down)
                first_up = idx_up[0] if idx_up.size else self.N
                first_down = idx_down[0] if idx_down.size else self.N
                enter = min(first_up, first_down)
                sigma = 1.0 if enter == first_up else -1.0
            else:
                score = np.full(self.N, np.inf)
                score[can_up] = d[can_up]
                score[can_down] = -d[can_down]
                enter = int(np.argmin(score))
                sigma = 1.0 if can_up[enter] else -1.0

            w = self.Binv @ self.A[:, enter]
            # max step before a basic variable hits a bound
            step = np.inf
            leave_row = -1
            leave_at_upper = False
            xb = self.xval[self.basis]
            denom = sigma * w
            best_den = 0.0
            for i in range(self.m):
                di = denom[i]
                if di > opts.pivot_tol:
                    lim = (xb[i] - self.lb[self.basis[i]]) / di
                    hits_upper = False
                elif di < -opts.pivot_tol:
                    lim = (self.ub[self.basis[i]] - xb[i]) / (-di)
                    hits_upper = True
                else:
                    continue
                if lim < -1e-12:
                    lim = 0.0
                if lim < step - 1e-12:
                    step, leave_row, leave_at_upper = lim, i, hits_upper
                    best_den = abs(di)
                elif lim < step + 1e-12:
                    if bland:
                        if self.basis[i] < self.basis[leave_row]:
                            step, leave_row, leave_at_upper = lim, i, hits_upper
                            best_den = abs(di)
                    elif abs(di) > best_den:
                        step, leave_row, leave_at_upper = lim, i, hits_upper
                        best_den = abs(di)

            own_room = room_up[enter] if sigma > 0 else room_down[enter]
            if step == np.inf and not np.isfinite(own_room):
                return UNBOUNDED
            if own_room < step:
                # bound flip: entering moves to its opposite bound
                self.xval[enter] += sigma * own_room
                self.xval[self.basis] = xb - denom * own_room
                if own_room <= 1e-11:
                    degenerate_streak += 1
                else:
                    degenerate_streak = 0
                    bland = False
            else:
                self.xval[enter] += sigma * step
                newxb = xb - denom * step
                leaving = self.basis[leave_row]
                newxb[leave_row] = self.xval[enter]
                self.xval[self.basis] = newxb
                self.xval[leaving] = (
                    self.ub[leaving] if leave_at_upper else self.lb[leaving]
                )
                self.basis[leave_row] = enter
                # product-form update of the explicit inverse
                piv = w[leave_row]
                self.Binv[leave_row, :] /= piv
                others = np.arange(self.m) != leave_row
                self.Binv[others, :] -= np.outer(
                    w[others], self.Binv[leave_row, :]
                )
                if step <= 1e-11:
                    degenerate_streak += 1
                else:
                    degenerate_streak = 0
                    bland = False
            if degenerate_streak > opts.bland_after:
                bland = True


def _augment(lp):
    """Append slack/surplus columns so every row is an equality."""
    m, n = lp.num_rows, lp.num_vars
    slack_rows = [i for i, s in enumerate(lp.constraint_sense) if s != EQ]
    ns = len(slack_rows)
    A = np.zeros((m, n + ns))
    A[:, :n] = lp.constraint_matrix
    lb = np.concatenate([lp.var_lower, np.zeros(ns)])
    ub = np.concatenate([lp.var_upper, np.full(ns, np.inf)])
    c = np.concatenate([lp.objective_coeffs, np.zeros(ns)])
    for k, i in enumerate(slack_rows):
        A[i, n + k] = 1.0 if lp.constraint_sense[i] == LE else -1.0
    return A, lp.constraint_rhs.copy(), c, lb, ub


def _initial_nonbasic_values(lb, ub):
    """Each variable starts at its finite bound nearest zero, or 0 if free."""
    x = np.zeros(lb.size)
    both = np.isfinite(lb) & np.isfinite(ub)
    x[both] = np.where(np.abs(lb[both]) <= np.abs(ub[both]), lb[both], ub[both])
    only_lo = np.isfinite(lb) & ~np.isfinite(ub)
    x[only_lo] = lb[only_lo]
    only_hi = ~np.isfinite(lb) & np.isfinite(ub)
    x[only_hi] = ub[only_hi]
    return x


def solve_lp(lp, opts=None):
    """Solve a LinearProgram with the two-phase bounded simplex.

    Returns an LpSolution with status OPTIMAL, INFEASIBLE, or UNBOUNDED.
    Raises DimensionMismatch for malformed input and IterationLimit when
    the pivot budget is exhausted.  Deterministic: identical input gives
    bit-identical output.
    """
    if opts is None:
        opts = SolverOptions()
    lp.validate()

    A, b, c, lb, ub = _augment(lp)
    m, n_aug = A.shape
    n = lp.num_vars

    if m == 0:
        # pure box problem: each variable sits at the cheaper bound
        x = _initial_nonbasic_values(lb, ub)[:n]
        better_hi = (lp.objective_coeffs < 0) & np.isfinite(lp.var_upper)
        better_lo = (lp.objective_coeffs > 0) & np.isfinite(lp.var_lower)
        x[better_hi] = lp.var_upper[better_hi]
        x[better_lo] = lp.var_lower[better_lo]
        unbounded = ((lp.objective_coeffs < 0) & ~np.isfinite(lp.var_upper)) | (
            (lp.objective_coeffs > 0) & ~np.isfinite(lp.var_lower)
        )
        if unbounded.any():
            return LpSolution(UNBOUNDED)
        return LpSolution(
            OPTIMAL, x, float(lp.objective_coeffs @ x), np.zeros(0), 0
        )

    x0 = _initial_nonbasic_values(lb, ub)
    resid = b - A @ x0
    signs = np.where(resid >= 0, 1.0, -1.0)
    A_art = np.hstack([A, np.diag(signs)])
    lb_art = np.concatenate([lb, np.zeros(m)])
    ub_art = np.concatenate([ub, np.full(m, np.inf)])
    art_cols = np.arange(n_aug, n_aug + m)

    tab = _Tableau(A_art, b, lb_art, ub_art, opts)
    xstart = np.concatenate([x0, np.zeros(m)])
    tab.set_basis(art_cols, xstart)

    c_phase1 = np.concatenate([np.zeros(n_aug), np.ones(m)])
    status = tab.run(c_phase1, opts.max_iter)
    if status != OPTIMAL:  # pragma: no cover - phase 1 is bounded below
        raise IterationLimit("phase 1 terminated abnormally")
    tab.refactor()
    scale = max(1.0, float(np.abs(b).max(initial=0.0)))
    phase1_obj = float(c_phase1 @ tab.solution())
    if phase1_obj > opts.feas_tol * scale * 10:
        return LpSolution(INFEASIBLE, iterations=tab.iterations)

    _drive_out_artificials(tab, art_cols, opts)
    # freeze artificials at zero for phase 2
    tab.lb[art_cols] = 0.0
    tab.ub[art_cols] = 0.0
    tab.xval[art_cols] = np.where(
        np.isin(art_cols, tab.basis), tab.xval[art_cols], 0.0
    )

    c_phase2 = np.concatenate([c, np.zeros(m)])
    status = tab.run(c_phase2, opts.max_iter)
    if status == UNBOUNDED:
        return LpSolution(UNBOUNDED, iterations=tab.iterations)

    tab.refactor()
    x_full = tab.solution()
    primal = x_full[:n]
    objective = float(lp.objective_coeffs @ primal)
    duals = np.asarray(tab.duals(c_phase2), dtype=float)
    return LpSolution(OPTIMAL, primal, objective, duals, tab.iterations)


def _drive_out_artificials(tab, art_cols, opts):
    """Pivot zero-level artificial variables out of the basis where a
    nonzero pivot exists; rows without one are redundant and keep their
    artificial frozen at zero."""
    art_set = set(int(a) for a in art_cols)
    first_art = int(art_cols[0])
    for row in range(tab.m):
        col = tab.basis[row]
        if int(col) not in art_set:
            continue
        brow = tab.Binv[row, :] @ tab.A[:, :first_art]
        candidates = np.flatnonzero(np.abs(brow) > 1e-9)
        in_basis = set(int(v) for v in tab.basis)
        pivot_col = -1
        for j in candidates:
            if int(j) not in in_basis:
                pivot_col = int(j)
                break
        if pivot_col < 0:
            continue
        w = tab.Binv @ tab.A[:, pivot_col]
        piv = w[row]
        tab.basis[row] = pivot_col
        tab.xval[col] = 0.0
        tab.Binv[row, :] /= piv
        others = np.arange(tab.m) != row
        tab.Binv[others, :] -= np.outer(w[others], tab.Binv[row, :])
        tab.recompute_basics()


def dump_lp(lp, path, binary_vars=None):
    """Write a plain-text debug dump of an LP instance.

    Layout (one section per header line):

        LP DUMP v1
        OBJECTIVE
        <c_0> <c_1> ...
        ROWS
        <sense> <rhs> <a_0> <a_1> ...      (one line per row)
        BOUNDS
        <lower> <upper>                    (one line per variable)
        BINARIES                           (only for MILP dumps)
        <i_0> <i_1> ...

    Infinities are written as -inf / inf.
    """
    lines = ["LP DUMP v1", "OBJECTIVE"]
    lines.append(" ".join(repr(v) for v in lp.objective_coeffs.tolist()))
    lines.append("ROWS")
    for i in range(lp.num_rows):
        coeffs = " ".join(repr(v) for v in lp.constraint_matrix[i].tolist())
        lines.append(f"{lp.constraint_sense[i]} {lp.constraint_rhs[i]!r} {coeffs}")
    lines.append("BOUNDS")
    for lo, hi in zip(lp.var_lower.tolist(), lp.var_upper.tolist()):
        lines.append(f"{lo!r} {hi!r}")
    if binary_vars is not None:
        lines.append("BINARIES")
        lines.append(" ".join(str(int(i)) for i in sorted(binary_vars)))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
