"""Independent brute-force oracles used to check the solvers.

These deliberately share no code with the simplex / branch-and-bound
implementations: vertices come from enumerating active-constraint sets,
and MILP optima from enumerating every binary assignment.
"""

import itertools

import numpy as np

from adol.lp import EQ, GE, LE, INFEASIBLE, OPTIMAL, LinearProgram, solve_lp


def lp_vertex_oracle(lp, feas_tol=1e-7):
    """Minimize over all vertices of a box-bounded LP.

    Every variable must have finite bounds, so the feasible set is a
    polytope and any feasible LP attains its optimum at a vertex formed
    by n active constraints (rows treated as equalities, or bound
    facets).  Returns (status, objective, x) with status "optimal" or
    "infeasible".
    """
    n = lp.num_vars
    assert np.all(np.isfinite(lp.var_lower)) and np.all(np.isfinite(lp.var_upper))

    facets = []
    for i in range(lp.num_rows):
        facets.append((lp.constraint_matrix[i], lp.constraint_rhs[i]))
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        facets.append((e, lp.var_lower[j]))
        facets.append((e.copy(), lp.var_upper[j]))

    best_obj = np.inf
    best_x = None
    for combo in itertools.combinations(range(len(facets)), n):
        M = np.array([facets[k][0] for k in combo])
        rhs = np.array([facets[k][1] for k in combo])
        if np.linalg.matrix_rank(M, tol=1e-10) < n:
            continue
        try:
            x = np.linalg.solve(M, rhs)
        except np.linalg.LinAlgError:
            continue
        if not _feasible(lp, x, feas_tol):
            continue
        obj = float(lp.objective_coeffs @ x)
        if obj < best_obj:
            best_obj = obj
            best_x = x
    if best_x is None:
        return INFEASIBLE, np.nan, None
    return OPTIMAL, best_obj, best_x


def _feasible(lp, x, tol):
    if np.any(x < lp.var_lower - tol) or np.any(x > lp.var_upper + tol):
        return False
    lhs = lp.constraint_matrix @ x
    for i, sense in enumerate(lp.constraint_sense):
        r = lhs[i] - lp.constraint_rhs[i]
        if sense == LE and r > tol:
            return False
        if sense == GE and r < -tol:
            return False
        if sense == EQ and abs(r) > tol:
            return False
    return True


def milp_enumeration_oracle(mip, opts=None):
    """Exhaustively fix every binary assignment and price the rest by LP.

    Returns (status, objective, x) where status is "optimal" or
    "infeasible".  Only sensible for a handful of binaries.
    """
    binaries = sorted(mip.binary_vars)
    base = mip.base
    best_obj = np.inf
    best_x = None
    for bits in itertools.product((0.0, 1.0), repeat=len(binaries)):
        lo = base.var_lower.copy()
        hi = base.var_upper.copy()
        for j, v in zip(binaries, bits):
            lo[j] = hi[j] = v
        fixed = LinearProgram(
            base.objective_coeffs,
            base.constraint_matrix,
            base.constraint_rhs,
            base.constraint_sense,
            lo,
            hi,
        )
        sol = solve_lp(fixed, opts)
        if sol.status == OPTIMAL and sol.objective < best_obj:
            best_obj = sol.objective
            best_x = sol.primal
    if best_x is None:
        return INFEASIBLE, np.nan, None
    return OPTIMAL, best_obj, best_x


def random_box_lp(rng, max_vars=6, max_rows=6):
    """Random dense LP with a finite box, mixed senses, mixed status."""
    n = int(rng.integers(1, max_vars + 1))
    m = int(rng.integers(0, max_rows + 1))
    c = rng.normal(size=n)
    A = rng.normal(size=(m, n))
    lb = rng.uniform(-5.0, 0.0, size=n)
    ub = rng.uniform(0.5, 5.0, size=n)
    senses = [([LE, GE, EQ])[int(k)] for k in rng.integers(0, 3, size=m)]
    # rhs anchored near an interior point so a fair share is feasible
    x_ref = rng.uniform(lb, ub)
    b = A @ x_ref + rng.normal(scale=2.0, size=m)
    return LinearProgram(c, A, b, senses, lb, ub)


def uc_day_ahead_oracle(forecast_loads, p, opts=None):
    """Enumerate every slow-unit commitment pattern, derive the minimal
    consistent startup/shutdown indicators, and price the rest by LP.

    Valid because startup/shutdown costs are nonnegative and the up/down
    window rows only tighten when indicators increase, so the minimal
    indicators are optimal for a given commitment pattern.
    """
    from adol.case2 import DayAheadLayout, build_uc_day_ahead, nodal_loads

    mip = build_uc_day_ahead(forecast_loads, p)
    lay = DayAheadLayout(p)
    I, T = lay.I, lay.T
    base = mip.base
    best_obj, best_x = np.inf, None
    for bits in itertools.product((0, 1), repeat=I * T):
        pattern = np.array(bits).reshape(I, T)
        lo = base.var_lower.copy()
        hi = base.var_upper.copy()
        for i in range(I):
            prev = int(p.initial_on[i])
            for t in range(T):
                di = pattern[i, t] - prev
                u, d = max(di, 0), max(-di, 0)
                prev = pattern[i, t]
                for col, v in (
                    (lay.commit(i, t), pattern[i, t]),
                    (lay.startup(i, t), u),
                    (lay.shutdown(i, t), d),
                ):
                    lo[col] = hi[col] = float(v)
        fixed = LinearProgram(
            base.objective_coeffs, base.constraint_matrix,
            base.constraint_rhs, base.constraint_sense, lo, hi,
        )
        sol = solve_lp(fixed, opts)
        if sol.status == OPTIMAL and sol.objective < best_obj:
            best_obj, best_x = sol.objective, sol.primal
    if best_x is None:
        return INFEASIBLE, np.nan, None
    return OPTIMAL, best_obj, best_x


def uc_real_time_oracle(true_loads, forecast_loads, day_ahead, p, opts=None):
    """Same enumeration idea for the quick-start commitments of stage 2."""
    from adol.case2 import RealTimeLayout, build_uc_real_time

    mip = build_uc_real_time(
        true_loads, forecast_loads, day_ahead.angles,
        day_ahead.up_reserve, day_ahead.down_reserve, p,
    )
    lay = RealTimeLayout(p)
    J, T = lay.J, lay.T
    base = mip.base
    best_obj, best_x = np.inf, None
    for bits in itertools.product((0, 1), repeat=J * T):
        pattern = np.array(bits).reshape(J, T)
        lo = base.var_lower.copy()
        hi = base.var_upper.copy()
        for j in range(J):
            prev = 0
            for t in range(T):
                dj = pattern[j, t] - prev
                u, d = max(dj, 0), max(-dj, 0)
                prev = pattern[j, t]
                for col, v in (
                    (lay.qs_commit(j, t), pattern[j, t]),
                    (lay.qs_startup(j, t), u),
                    (lay.qs_shutdown(j, t), d),
                ):
                    lo[col] = hi[col] = float(v)
        fixed = LinearProgram(
            base.objective_coeffs, base.constraint_matrix,
            base.constraint_rhs, base.constraint_sense, lo, hi,
        )
        sol = solve_lp(fixed, opts)
        if sol.status == OPTIMAL and sol.objective < best_obj:
            best_obj, best_x = sol.objective, sol.primal
    if best_x is None:
        return INFEASIBLE, np.nan, None
    return OPTIMAL, best_obj, best_x
