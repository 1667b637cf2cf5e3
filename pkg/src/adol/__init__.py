"""Decision-objective surrogate losses for forecast-then-optimize dispatch."""

from adol.lp import LinearProgram, LpSolution, SolverOptions, solve_lp

__all__ = [
    "LinearProgram",
    "LpSolution",
    "SolverOptions",
    "solve_lp",
]
