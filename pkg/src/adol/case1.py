"""Single-period two-stage dispatch, copper plate (no network).

Stage 1 schedules generation plus upward/downward reserves against a
forecast load; stage 2 activates the procured reserves and, if they run
short, quick-start units against the realized load.  A value-of-lost-load
slack keeps stage 2 feasible for any deficit, so batch labeling never
aborts; shed > 0 marks the scenario as abnormal.  Stage-2 cost can be
negative under over-forecast because down-activation refunds energy that
was scheduled but not produced.

Variable layouts (fixed, relied on by the outcome extractors):
  day-ahead   [P_1..P_I, RU_1..RU_I, RD_1..RD_I]
  real-time   [rU_1..rU_I, rD_1..rD_I, qs_1..qs_J, shed]
"""

from dataclasses import dataclass, replace

import numpy as np

from adol.lp import EQ, GE, LE, OPTIMAL, LinearProgram, solve_lp


class InfeasibleCapacity(ValueError):
    """Total capacity cannot cover the load plus reserve requirements."""


class DispatchError(RuntimeError):
    """A dispatch LP failed to solve to optimality."""


@dataclass
class Case1Params:
    """Unit data for the single-period model.

    Costs are $/MWh for energy and $/MW for reserve procurement; limits
    are MW.  reserve_fraction_up/down size the reserve requirement as a
    share of the forecast load.
    """

    energy_cost: np.ndarray
    quickstart_cost: np.ndarray
    up_reserve_cost: np.ndarray
    down_reserve_cost: np.ndarray
    gen_limit: np.ndarray
    up_reserve_limit: np.ndarray
    down_reserve_limit: np.ndarray
    quickstart_limit: np.ndarray
    reserve_fraction_up: float
    reserve_fraction_down: float
    voll: float = 10_000.0

    def __post_init__(self):
        for name in (
            "energy_cost",
            "quickstart_cost",
            "up_reserve_cost",
            "down_reserve_cost",
            "gen_limit",
            "up_reserve_limit",
            "down_reserve_limit",
            "quickstart_limit",
        ):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))

    @property
    def num_units(self):
        return self.energy_cost.size

    @property
    def num_quickstart(self):
        return self.quickstart_cost.size

    def validate(self):
        vecs = [
            self.energy_cost,
            self.up_reserve_cost,
            self.down_reserve_cost,
            self.gen_limit,
            self.up_reserve_limit,
            self.down_reserve_limit,
        ]
        if not all(v.size == self.num_units for v in vecs):
            raise ValueError("unit vectors must share one length")
        if self.quickstart_limit.size != self.num_quickstart:
            raise ValueError("quick-start vectors must share one length")
        if any(np.any(v < 0) for v in vecs + [self.quickstart_cost, self.quickstart_limit]):
            raise ValueError("costs and limits must be nonnegative")
        if not (0 <= self.reserve_fraction_up < 1 and 0 <= self.reserve_fraction_down < 1):
            raise ValueError("reserve fractions must lie in [0, 1)")
        if np.any(self.up_reserve_limit > self.gen_limit) or np.any(
            self.down_reserve_limit > self.gen_limit
        ):
            raise ValueError("reserve limits must not exceed generation limits")


def three_unit_system():
    """Stock three-unit system used throughout the tests and configs."""
    c = np.array([30.0, 40.0, 50.0])
    return Case1Params(
        energy_cost=c,
        quickstart_cost=np.array([60.0, 70.0, 80.0]),
        up_reserve_cost=0.10 * c,
        down_reserve_cost=0.02 * c,
        gen_limit=np.array([800.0, 800.0, 800.0]),
        up_reserve_limit=0.40 * np.array([800.0, 800.0, 800.0]),
        down_reserve_limit=0.40 * np.array([800.0, 800.0, 800.0]),
        quickstart_limit=np.array([200.0, 200.0, 200.0]),
        reserve_fraction_up=0.15,
        reserve_fraction_down=0.15,
    )


@dataclass
class Case1DayAheadOutcome:
    generation: np.ndarray
    up_reserve: np.ndarray
    down_reserve: np.ndarray
    cost: float


@dataclass
class Case1RealTimeOutcome:
    up_activation: np.ndarray
    down_activation: np.ndarray
    quickstart: np.ndarray
    shed: float
    cost: float


@dataclass
class CostBreakdown:
    stage1: float
    stage2: float
    total: float
    shed: float = 0.0


def build_day_ahead(forecast_load, p):
    """LP for the stage-1 schedule at forecast load (MW).

    Raises InfeasibleCapacity when the aggregate limits already rule out
    a feasible schedule.
    """
    if forecast_load < 0:
        raise ValueError("forecast load must be nonnegative")
    I = p.num_units
    su, sd = p.reserve_fraction_up, p.reserve_fraction_down
    need_up = su * forecast_load
    need_down = sd * forecast_load
    if (1 + su) * forecast_load > p.gen_limit.sum() + 1e-9:
        raise InfeasibleCapacity(
            f"load {forecast_load} plus up reserve exceeds {p.gen_limit.sum()} MW"
        )
    if need_up > p.up_reserve_limit.sum() + 1e-9:
        raise InfeasibleCapacity("up-reserve requirement exceeds reserve limits")
    if need_down > p.down_reserve_limit.sum() + 1e-9:
        raise InfeasibleCapacity("down-reserve requirement exceeds reserve limits")

    n = 3 * I
    c = np.concatenate([p.energy_cost, p.up_reserve_cost, p.down_reserve_cost])
    rows = []
    rhs = []
    senses = []

    bal = np.zeros(n)
    bal[:I] = 1.0
    rows.append(bal)
    rhs.append(forecast_load)
    senses.append(EQ)

    up = np.zeros(n)
    up[I : 2 * I] = 1.0
    rows.append(up)
    rhs.append(need_up)
    senses.append(EQ)

    down = np.zeros(n)
    down[2 * I : 3 * I] = 1.0
    rows.append(down)
    rhs.append(need_down)
    senses.append(EQ)

    for i in range(I):
        r = np.zeros(n)
        r[I + i] = 1.0
        r[2 * I + i] = 1.0
        rows.append(r)
        rhs.append(p.gen_limit[i])
        senses.append(LE)
    for i in range(I):
        r = np.zeros(n)
        r[i] = 1.0
        r[I + i] = 1.0
        rows.append(r)
        rhs.append(p.gen_limit[i])
        senses.append(LE)
    for i in range(I):
        r = np.zeros(n)
        r[i] = 1.0
        r[2 * I + i] = -1.0
        rows.append(r)
        rhs.append(0.0)
        senses.append(GE)

    lb = np.zeros(n)
    ub = np.concatenate([p.gen_limit, p.up_reserve_limit, p.down_reserve_limit])
    return LinearProgram(c, np.array(rows), np.array(rhs), senses, lb, ub)


def build_real_time(true_load, forecast_load, reserved_up, reserved_down, p):
    """LP for the stage-2 balancing problem with stage-1 reserves fixed."""
    I, J = p.num_units, p.num_quickstart
    n = 2 * I + J + 1
    c = np.concatenate(
        [p.energy_cost, -p.energy_cost, p.quickstart_cost, [p.voll]]
    )
    row = np.zeros(n)
    row[:I] = 1.0
    row[I : 2 * I] = -1.0
    row[2 * I : 2 * I + J] = 1.0
    row[-1] = 1.0
    rhs = np.array([true_load - forecast_load])
    lb = np.zeros(n)
    ub = np.concatenate(
        [
            np.asarray(reserved_up, float),
            np.asarray(reserved_down, float),
            p.quickstart_limit,
            [np.inf],
        ]
    )
    return LinearProgram(c, row.reshape(1, -1), rhs, [GE], lb, ub)


def solve_day_ahead(forecast_load, p, opts=None):
    lp = build_day_ahead(forecast_load, p)
    sol = solve_lp(lp, opts)
    if sol.status != OPTIMAL:
        raise DispatchError(f"day-ahead LP ended with status {sol.status}")
    I = p.num_units
    x = sol.primal
    return Case1DayAheadOutcome(
        x[:I].copy(), x[I : 2 * I].copy(), x[2 * I : 3 * I].copy(), sol.objective
    )


def solve_real_time(true_load, forecast_load, reserved_up, reserved_down, p, opts=None):
    lp = build_real_time(true_load, forecast_load, reserved_up, reserved_down, p)
    sol = solve_lp(lp, opts)
    if sol.status != OPTIMAL:
        raise DispatchError(f"real-time LP ended with status {sol.status}")
    I, J = p.num_units, p.num_quickstart
    x = sol.primal
    return Case1RealTimeOutcome(
        x[:I].copy(),
        x[I : 2 * I].copy(),
        x[2 * I : 2 * I + J].copy(),
        float(x[-1]),
        sol.objective,
    )


def evaluate_two_stage(forecast, truth, p, opts=None):
    """Total dispatch cost of acting on `forecast` when `truth` realizes.

    Stage 2 is solved with the stage-1 reserve allocation fixed; total is
    the sum of both stage objectives.
    """
    da = solve_day_ahead(float(forecast), p, opts)
    rt = solve_real_time(
        float(truth), float(forecast), da.up_reserve, da.down_reserve, p, opts
    )
    return CostBreakdown(da.cost, rt.cost, da.cost + rt.cost, rt.shed)


def dynamic_param_vector(p):
    """Flatten the cost coefficients that vary in a dynamic environment:
    energy, quick-start, up-reserve, and down-reserve costs, in that order."""
    return np.concatenate(
        [p.energy_cost, p.quickstart_cost, p.up_reserve_cost, p.down_reserve_cost]
    )


def with_dynamic_params(p, vec):
    """Rebuild params with the dynamic cost block replaced by `vec`."""
    vec = np.asarray(vec, dtype=float)
    I, J = p.num_units, p.num_quickstart
    if vec.size != 2 * I + J + I:
        raise ValueError(f"expected {3 * I + J} dynamic entries, got {vec.size}")
    return replace(
        p,
        energy_cost=vec[:I].copy(),
        quickstart_cost=vec[I : I + J].copy(),
        up_reserve_cost=vec[I + J : 2 * I + J].copy(),
        down_reserve_cost=vec[2 * I + J :].copy(),
    )
