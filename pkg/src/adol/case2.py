"""Multi-period unit commitment with DC power flow, two-stage.

Stage 1 commits slow units over the horizon and schedules energy plus
reserves against nodal load forecasts; stage 2 re-balances each node
with reserve activations and quick-start units once true loads realize,
keeping the day-ahead angles fixed and re-solving the flow deviations.

Line limits are enforced in both directions (DC flows are signed).  The
stage-2 nodal balance is an equality, so it carries BOTH a shed slack
(uncovered deficit) and a spill slack (surplus beyond the procured down
reserve), each priced at the value of lost load; either being positive
flags the scenario as abnormal.

Variable layouts are fixed and exposed through DayAheadLayout /
RealTimeLayout so solutions can be unpacked without guessing offsets.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from adol.case1 import CostBreakdown, DispatchError, InfeasibleCapacity
from adol.lp import EQ, GE, LE, LinearProgram, OPTIMAL
from adol.milp import GAP_LIMIT, MixedIntegerProgram, solve_milp


@dataclass
class NetworkSpec:
    """Topology for the DC flow model.

    lines hold (from_node, to_node, reactance_pu, capacity_mw); the
    reference node's angle is pinned to zero.  unit_nodes / qs_nodes /
    load_nodes place slow units, quick-start units, and load points.
    """

    node_count: int
    lines: list
    reference_node: int
    unit_nodes: np.ndarray
    qs_nodes: np.ndarray
    load_nodes: np.ndarray

    def __post_init__(self):
        self.unit_nodes = np.asarray(self.unit_nodes, dtype=int)
        self.qs_nodes = np.asarray(self.qs_nodes, dtype=int)
        self.load_nodes = np.asarray(self.load_nodes, dtype=int)
        self.lines = [
            (int(a), int(b), float(x), float(cap)) for a, b, x, cap in self.lines
        ]

    @property
    def num_lines(self):
        return len(self.lines)

    def validate(self):
        n = self.node_count
        for a, b, x, cap in self.lines:
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"line ({a},{b}) references a missing node")
            if x <= 0 or cap <= 0:
                raise ValueError("reactances and capacities must be positive")
        for arr in (self.unit_nodes, self.qs_nodes, self.load_nodes):
            if arr.size and (arr.min() < 0 or arr.max() >= n):
                raise ValueError("unit/load placed on a missing node")
        if not 0 <= self.reference_node < n:
            raise ValueError("reference node out of range")
        if n > 1 and not self._connected():
            raise ValueError("network graph is not connected")

    def _connected(self):
        adj = {i: set() for i in range(self.node_count)}
        for a, b, _, _ in self.lines:
            adj[a].add(b)
            adj[b].add(a)
        seen = {0}
        stack = [0]
        while stack:
            for nb in adj[stack.pop()]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        return len(seen) == self.node_count

    def neighbors(self, n):
        """(other_node, reactance) pairs over lines incident to n."""
        out = []
        for a, b, x, _ in self.lines:
            if a == n:
                out.append((b, x))
            elif b == n:
                out.append((a, x))
        return out


@dataclass
class Case2Params:
    """Unit, network, and horizon data for the commitment model."""

    energy_cost: np.ndarray
    up_reserve_cost: np.ndarray
    down_reserve_cost: np.ndarray
    startup_cost: np.ndarray
    shutdown_cost: np.ndarray
    gen_min: np.ndarray
    gen_max: np.ndarray
    ramp_up: np.ndarray
    ramp_down: np.ndarray
    min_up: np.ndarray
    min_down: np.ndarray
    quickstart_cost: np.ndarray
    qs_startup_cost: np.ndarray
    qs_shutdown_cost: np.ndarray
    qs_min: np.ndarray
    qs_max: np.ndarray
    qs_ramp_up: np.ndarray
    qs_ramp_down: np.ndarray
    reserve_fraction_up: float
    reserve_fraction_down: float
    horizon: int
    network: NetworkSpec
    participation: np.ndarray
    initial_on: np.ndarray = None
    initial_gen: np.ndarray = None
    up_reserve_limit: np.ndarray = None
    down_reserve_limit: np.ndarray = None
    voll: float = 10_000.0

    def __post_init__(self):
        for name in (
            "energy_cost", "up_reserve_cost", "down_reserve_cost",
            "startup_cost", "shutdown_cost", "gen_min", "gen_max",
            "ramp_up", "ramp_down", "quickstart_cost", "qs_startup_cost",
            "qs_shutdown_cost", "qs_min", "qs_max", "qs_ramp_up",
            "qs_ramp_down", "participation",
        ):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        self.min_up = np.asarray(self.min_up, dtype=int)
        self.min_down = np.asarray(self.min_down, dtype=int)
        if self.initial_on is None:
            self.initial_on = np.ones(self.num_units, dtype=int)
        self.initial_on = np.asarray(self.initial_on, dtype=int)
        if self.initial_gen is None:
            self.initial_gen = np.where(self.initial_on > 0, self.gen_min, 0.0)
        self.initial_gen = np.asarray(self.initial_gen, dtype=float)
        if self.up_reserve_limit is None:
            self.up_reserve_limit = self.gen_max.copy()
        if self.down_reserve_limit is None:
            self.down_reserve_limit = self.gen_max.copy()
        self.up_reserve_limit = np.asarray(self.up_reserve_limit, dtype=float)
        self.down_reserve_limit = np.asarray(self.down_reserve_limit, dtype=float)

    @property
    def num_units(self):
        return self.energy_cost.size

    @property
    def num_quickstart(self):
        return self.quickstart_cost.size

    @property
    def num_loads(self):
        return self.network.load_nodes.size

    def validate(self):
        if np.any(self.gen_min > self.gen_max):
            raise ValueError("gen_min above gen_max")
        if np.any(self.min_up < 1) or np.any(self.min_down < 1):
            raise ValueError("min up/down times must be at least one hour")
        if np.any(self.ramp_up <= 0) or np.any(self.ramp_down <= 0):
            raise ValueError("ramp rates must be positive")
        if self.horizon < 1:
            raise ValueError("horizon must be at least one hour")
        if abs(self.participation.sum() - 1.0) > 1e-9:
            raise ValueError("participation factors must sum to one")
        if self.participation.size != self.num_loads:
            raise ValueError("one participation factor per load point")
        self.network.validate()
        if self.network.unit_nodes.size != self.num_units:
            raise ValueError("one placement node per slow unit")
        if self.network.qs_nodes.size != self.num_quickstart:
            raise ValueError("one placement node per quick-start unit")


def three_node_system(horizon=4):
    """Small three-node instance: two slow units, one quick-start unit,
    load split over nodes 1 and 2."""
    network = NetworkSpec(
        node_count=3,
        lines=[(0, 1, 0.10, 120.0), (1, 2, 0.10, 120.0), (0, 2, 0.20, 120.0)],
        reference_node=0,
        unit_nodes=[0, 1],
        qs_nodes=[2],
        load_nodes=[1, 2],
    )
    return Case2Params(
        energy_cost=[30.0, 40.0],
        up_reserve_cost=[3.0, 4.0],
        down_reserve_cost=[0.6, 0.8],
        startup_cost=[100.0, 120.0],
        shutdown_cost=[50.0, 60.0],
        gen_min=[20.0, 15.0],
        gen_max=[120.0, 100.0],
        ramp_up=[60.0, 60.0],
        ramp_down=[60.0, 60.0],
        min_up=[2, 2],
        min_down=[2, 2],
        quickstart_cost=[60.0],
        qs_startup_cost=[80.0],
        qs_shutdown_cost=[40.0],
        qs_min=[5.0],
        qs_max=[80.0],
        qs_ramp_up=[80.0],
        qs_ramp_down=[80.0],
        reserve_fraction_up=0.10,
        reserve_fraction_down=0.10,
        horizon=horizon,
        network=network,
        participation=[0.5, 0.5],
        initial_on=[1, 0],
        initial_gen=[20.0, 0.0],
    )


class DayAheadLayout:
    """Column offsets of the stage-1 MIP:
    [P | RU | RD | theta | commit | startup | shutdown]."""

    def __init__(self, p):
        I, T = p.num_units, p.horizon
        N = p.network.node_count
        self.I, self.T, self.N = I, T, N
        self.p0 = 0
        self.ru0 = I * T
        self.rd0 = 2 * I * T
        self.th0 = 3 * I * T
        self.i0 = 3 * I * T + N * T
        self.u0 = self.i0 + I * T
        self.d0 = self.u0 + I * T
        self.num_vars = self.d0 + I * T

    def p(self, i, t):
        return self.p0 + i * self.T + t

    def ru(self, i, t):
        return self.ru0 + i * self.T + t

    def rd(self, i, t):
        return self.rd0 + i * self.T + t

    def theta(self, n, t):
        return self.th0 + n * self.T + t

    def commit(self, i, t):
        return self.i0 + i * self.T + t

    def startup(self, i, t):
        return self.u0 + i * self.T + t

    def shutdown(self, i, t):
        return self.d0 + i * self.T + t

    def binaries(self):
        return frozenset(range(self.i0, self.num_vars))


class RealTimeLayout:
    """Column offsets of the stage-2 MIP:
    [rU | rD | Pqs | thetaRT | shed | spill | qs_commit | qs_startup |
    qs_shutdown]."""

    def __init__(self, p):
        I, J, T = p.num_units, p.num_quickstart, p.horizon
        N = p.network.node_count
        self.I, self.J, self.T, self.N = I, J, T, N
        self.ru0 = 0
        self.rd0 = I * T
        self.qs0 = 2 * I * T
        self.th0 = 2 * I * T + J * T
        self.shed0 = self.th0 + N * T
        self.spill0 = self.shed0 + N * T
        self.iqs0 = self.spill0 + N * T
        self.uqs0 = self.iqs0 + J * T
        self.dqs0 = self.uqs0 + J * T
        self.num_vars = self.dqs0 + J * T

    def ru(self, i, t):
        return self.ru0 + i * self.T + t

    def rd(self, i, t):
        return self.rd0 + i * self.T + t

    def qs(self, j, t):
        return self.qs0 + j * self.T + t

    def theta(self, n, t):
        return self.th0 + n * self.T + t

    def shed(self, n, t):
        return self.shed0 + n * self.T + t

    def spill(self, n, t):
        return self.spill0 + n * self.T + t

    def qs_commit(self, j, t):
        return self.iqs0 + j * self.T + t

    def qs_startup(self, j, t):
        return self.uqs0 + j * self.T + t

    def qs_shutdown(self, j, t):
        return self.dqs0 + j * self.T + t

    def binaries(self):
        return frozenset(range(self.iqs0, self.num_vars))


def nodal_loads(system_profile, p):
    """Split a system profile (length T) across load points by the fixed
    participation factors; passes (K, T) matrices through unchanged."""
    arr = np.asarray(system_profile, dtype=float)
    if arr.ndim == 2:
        return arr
    return np.outer(p.participation, arr)


def build_uc_day_ahead(forecast_loads, p):
    """Stage-1 MIP over nodal forecast loads (K loads x T hours)."""
    p.validate()
    L = nodal_loads(forecast_loads, p)
    K, T = L.shape
    if T != p.horizon:
        raise ValueError(f"profile has {T} hours, params expect {p.horizon}")
    if np.any(L < 0):
        raise ValueError("loads must be nonnegative")
    system = L.sum(axis=0)
    peak_need = (1 + p.reserve_fraction_up) * system.max(initial=0.0)
    if peak_need > p.gen_max.sum() + 1e-9:
        raise InfeasibleCapacity(
            f"peak load plus reserve {peak_need:.1f} MW exceeds slow-unit "
            f"capacity {p.gen_max.sum():.1f} MW"
        )

    lay = DayAheadLayout(p)
    net = p.network
    I, N = lay.I, lay.N
    n = lay.num_vars

    c = np.zeros(n)
    for i in range(I):
        for t in range(T):
            c[lay.p(i, t)] = p.energy_cost[i]
            c[lay.ru(i, t)] = p.up_reserve_cost[i]
            c[lay.rd(i, t)] = p.down_reserve_cost[i]
            c[lay.commit(i, t)] = 0.0
            c[lay.startup(i, t)] = p.startup_cost[i]
            c[lay.shutdown(i, t)] = p.shutdown_cost[i]

    rows, rhs, senses = [], [], []

    def add(row, b, s):
        rows.append(row)
        rhs.append(b)
        senses.append(s)

    # nodal balance
    for node in range(N):
        for t in range(T):
            r = np.zeros(n)
            for i in range(I):
                if net.unit_nodes[i] == node:
                    r[lay.p(i, t)] = 1.0
            for other, x in net.neighbors(node):
                r[lay.theta(node, t)] += -1.0 / x
                r[lay.theta(other, t)] += 1.0 / x
            load_here = sum(
                L[k, t] for k in range(K) if net.load_nodes[k] == node
            )
            add(r, load_here, EQ)

    # line limits, both directions
    for a, b, x, cap in net.lines:
        for t in range(T):
            r = np.zeros(n)
            r[lay.theta(a, t)] = 1.0 / x
            r[lay.theta(b, t)] = -1.0 / x
            add(r, cap, LE)
            add(-r, cap, LE)

    # system reserve requirements
    for t in range(T):
        r = np.zeros(n)
        for i in range(I):
            r[lay.ru(i, t)] = 1.0
        add(r, p.reserve_fraction_up * system[t], EQ)
        r = np.zeros(n)
        for i in range(I):
            r[lay.rd(i, t)] = 1.0
        add(r, p.reserve_fraction_down * system[t], EQ)

    for i in range(I):
        for t in range(T):
            # generation limits tied to commitment
            r = np.zeros(n)
            r[lay.p(i, t)] = 1.0
            r[lay.ru(i, t)] = 1.0
            r[lay.commit(i, t)] = -p.gen_max[i]
            add(r, 0.0, LE)
            r = np.zeros(n)
            r[lay.p(i, t)] = 1.0
            r[lay.rd(i, t)] = -1.0
            r[lay.commit(i, t)] = -p.gen_min[i]
            add(r, 0.0, GE)
            # startup/shutdown logic
            r = np.zeros(n)
            r[lay.startup(i, t)] = 1.0
            r[lay.shutdown(i, t)] = -1.0
            r[lay.commit(i, t)] = -1.0
            if t > 0:
                r[lay.commit(i, t - 1)] = 1.0
                add(r, 0.0, EQ)
            else:
                add(r, -float(p.initial_on[i]), EQ)
            # ramps
            r = np.zeros(n)
            r[lay.p(i, t)] = 1.0
            if t > 0:
                r[lay.p(i, t - 1)] = -1.0
                add(r, p.ramp_up[i], LE)
            else:
                add(r, p.ramp_up[i] + p.initial_gen[i], LE)
            r = np.zeros(n)
            r[lay.p(i, t)] = -1.0
            if t > 0:
                r[lay.p(i, t - 1)] = 1.0
                add(r, p.ramp_down[i], LE)
            else:
                add(r, p.ramp_down[i] - p.initial_gen[i], LE)

        # minimum up / down windows (in-horizon windows only)
        for t in range(int(p.min_up[i]) - 1, T):
            r = np.zeros(n)
            for tp in range(t - int(p.min_up[i]) + 1, t + 1):
                r[lay.startup(i, tp)] = 1.0
            r[lay.commit(i, t)] = -1.0
            add(r, 0.0, LE)
        for t in range(int(p.min_down[i]) - 1, T):
            r = np.zeros(n)
            for tp in range(t - int(p.min_down[i]) + 1, t + 1):
                r[lay.shutdown(i, tp)] = 1.0
            r[lay.commit(i, t)] = 1.0
            add(r, 1.0, LE)

    lb = np.zeros(n)
    ub = np.full(n, np.inf)
    for i in range(I):
        for t in range(T):
            ub[lay.p(i, t)] = p.gen_max[i]
            ub[lay.ru(i, t)] = p.up_reserve_limit[i]
            ub[lay.rd(i, t)] = p.down_reserve_limit[i]
            for col in (lay.commit(i, t), lay.startup(i, t), lay.shutdown(i, t)):
                ub[col] = 1.0
    for node in range(N):
        for t in range(T):
            col = lay.theta(node, t)
            if node == net.reference_node:
                lb[col] = ub[col] = 0.0
            else:
                lb[col] = -np.inf

    base = LinearProgram(c, np.array(rows), np.array(rhs), senses, lb, ub)
    return MixedIntegerProgram(base, lay.binaries())


def build_uc_real_time(true_loads, forecast_loads, fixed_angles, reserved_up,
                       reserved_down, p):
    """Stage-2 MIP: reserve activations plus quick-start commitment.

    fixed_angles are the stage-1 angles (N x T); the balance rows are in
    deviation form, so only flow changes relative to stage 1 appear.
    """
    L_true = nodal_loads(true_loads, p)
    L_fc = nodal_loads(forecast_loads, p)
    lay = RealTimeLayout(p)
    net = p.network
    I, J, N, T = lay.I, lay.J, lay.N, lay.T
    n = lay.num_vars
    fixed_angles = np.asarray(fixed_angles, dtype=float)

    c = np.zeros(n)
    for i in range(I):
        for t in range(T):
            c[lay.ru(i, t)] = p.energy_cost[i]
            c[lay.rd(i, t)] = -p.energy_cost[i]
    for j in range(J):
        for t in range(T):
            c[lay.qs(j, t)] = p.quickstart_cost[j]
            c[lay.qs_startup(j, t)] = p.qs_startup_cost[j]
            c[lay.qs_shutdown(j, t)] = p.qs_shutdown_cost[j]
    for node in range(N):
        for t in range(T):
            c[lay.shed(node, t)] = p.voll
            c[lay.spill(node, t)] = p.voll

    rows, rhs, senses = [], [], []

    def add(row, b, s):
        rows.append(row)
        rhs.append(b)
        senses.append(s)

    # nodal deviation balance
    for node in range(N):
        for t in range(T):
            r = np.zeros(n)
            for i in range(I):
                if net.unit_nodes[i] == node:
                    r[lay.ru(i, t)] = 1.0
                    r[lay.rd(i, t)] = -1.0
            for j in range(J):
                if net.qs_nodes[j] == node:
                    r[lay.qs(j, t)] = 1.0
            da_flow = 0.0
            for other, x in net.neighbors(node):
                r[lay.theta(node, t)] += -1.0 / x
                r[lay.theta(other, t)] += 1.0 / x
                da_flow += (fixed_angles[node, t] - fixed_angles[other, t]) / x
            r[lay.shed(node, t)] = 1.0
            r[lay.spill(node, t)] = -1.0
            dev = sum(
                (L_true[k, t] - L_fc[k, t])
                for k in range(p.num_loads)
                if net.load_nodes[k] == node
            )
            add(r, dev - da_flow, EQ)

    # real-time line limits
    for a, b, x, cap in net.lines:
        for t in range(T):
            r = np.zeros(n)
            r[lay.theta(a, t)] = 1.0 / x
            r[lay.theta(b, t)] = -1.0 / x
            add(r, cap, LE)
            add(-r, cap, LE)

    for j in range(J):
        for t in range(T):
            # output window tied to quick-start commitment
            r = np.zeros(n)
            r[lay.qs(j, t)] = 1.0
            r[lay.qs_commit(j, t)] = -p.qs_max[j]
            add(r, 0.0, LE)
            r = np.zeros(n)
            r[lay.qs(j, t)] = 1.0
            r[lay.qs_commit(j, t)] = -p.qs_min[j]
            add(r, 0.0, GE)
            # commitment logic, initially off
            r = np.zeros(n)
            r[lay.qs_startup(j, t)] = 1.0
            r[lay.qs_shutdown(j, t)] = -1.0
            r[lay.qs_commit(j, t)] = -1.0
            if t > 0:
                r[lay.qs_commit(j, t - 1)] = 1.0
            add(r, 0.0, EQ)
            # ramps from a cold start
            r = np.zeros(n)
            r[lay.qs(j, t)] = 1.0
            if t > 0:
                r[lay.qs(j, t - 1)] = -1.0
            add(r, p.qs_ramp_up[j], LE)
            r = np.zeros(n)
            r[lay.qs(j, t)] = -1.0
            if t > 0:
                r[lay.qs(j, t - 1)] = 1.0
            add(r, p.qs_ramp_down[j], LE)

    reserved_up = np.asarray(reserved_up, dtype=float)
    reserved_down = np.asarray(reserved_down, dtype=float)
    lb = np.zeros(n)
    ub = np.full(n, np.inf)
    for i in range(I):
        for t in range(T):
            ub[lay.ru(i, t)] = reserved_up[i, t]
            ub[lay.rd(i, t)] = reserved_down[i, t]
    for j in range(J):
        for t in range(T):
            ub[lay.qs(j, t)] = p.qs_max[j]
            for col in (
                lay.qs_commit(j, t),
                lay.qs_startup(j, t),
                lay.qs_shutdown(j, t),
            ):
                ub[col] = 1.0
    for node in range(N):
        for t in range(T):
            col = lay.theta(node, t)
            if node == net.reference_node:
                lb[col] = ub[col] = 0.0
            else:
                lb[col] = -np.inf

    base = LinearProgram(c, np.array(rows), np.array(rhs), senses, lb, ub)
    return MixedIntegerProgram(base, lay.binaries())


@dataclass
class UcOutcome:
    generation: np.ndarray
    up_reserve: np.ndarray
    down_reserve: np.ndarray
    commit: np.ndarray
    startup: np.ndarray
    shutdown: np.ndarray
    angles: np.ndarray
    cost: float


@dataclass
class RtOutcome:
    up_activation: np.ndarray
    down_activation: np.ndarray
    quickstart: np.ndarray
    qs_commit: np.ndarray
    shed: float
    cost: float


def _grid(x, lay, getter, rows, cols):
    out = np.zeros((rows, cols))
    for a in range(rows):
        for t in range(cols):
            out[a, t] = x[getter(a, t)]
    return out


def solve_uc_day_ahead(forecast_loads, p, opts=None):
    mip = build_uc_day_ahead(forecast_loads, p)
    sol = solve_milp(mip, opts)
    if sol.status not in (OPTIMAL, GAP_LIMIT) or sol.primal is None:
        raise DispatchError(f"day-ahead commitment ended with status {sol.status}")
    lay = DayAheadLayout(p)
    x = sol.primal
    T = p.horizon
    return UcOutcome(
        _grid(x, lay, lay.p, lay.I, T),
        _grid(x, lay, lay.ru, lay.I, T),
        _grid(x, lay, lay.rd, lay.I, T),
        np.round(_grid(x, lay, lay.commit, lay.I, T)).astype(int),
        np.round(_grid(x, lay, lay.startup, lay.I, T)).astype(int),
        np.round(_grid(x, lay, lay.shutdown, lay.I, T)).astype(int),
        _grid(x, lay, lay.theta, lay.N, T),
        sol.objective,
    )


def solve_uc_real_time(true_loads, forecast_loads, day_ahead, p, opts=None):
    mip = build_uc_real_time(
        true_loads, forecast_loads, day_ahead.angles,
        day_ahead.up_reserve, day_ahead.down_reserve, p,
    )
    sol = solve_milp(mip, opts)
    if sol.status not in (OPTIMAL, GAP_LIMIT) or sol.primal is None:
        raise DispatchError(f"real-time balancing ended with status {sol.status}")
    lay = RealTimeLayout(p)
    x = sol.primal
    T = p.horizon
    shed_total = float(
        sum(x[lay.shed(nd, t)] + x[lay.spill(nd, t)] for nd in range(lay.N) for t in range(T))
    )
    return RtOutcome(
        _grid(x, lay, lay.ru, lay.I, T),
        _grid(x, lay, lay.rd, lay.I, T),
        _grid(x, lay, lay.qs, lay.J, T),
        np.round(_grid(x, lay, lay.qs_commit, lay.J, T)).astype(int),
        shed_total,
        sol.objective,
    )


def evaluate_two_stage_case2(forecast_profile, true_profile, p, opts=None):
    """Total two-stage cost of acting on a forecast system profile.

    Profiles may be system-level (length T, disaggregated by the
    participation factors) or already nodal (K x T).
    """
    da = solve_uc_day_ahead(forecast_profile, p, opts)
    rt = solve_uc_real_time(true_profile, forecast_profile, da, p, opts)
    return CostBreakdown(da.cost, rt.cost, da.cost + rt.cost, rt.shed)


def line_flows(angles, network):
    """Per-line flows (L x T) implied by nodal angles (N x T)."""
    angles = np.asarray(angles, dtype=float)
    flows = np.zeros((network.num_lines, angles.shape[1]))
    for idx, (a, b, x, _) in enumerate(network.lines):
        flows[idx] = (angles[a] - angles[b]) / x
    return flows


def dynamic_param_vector(p):
    """Dynamic cost block: energy, quick-start, up- and down-reserve."""
    return np.concatenate(
        [p.energy_cost, p.quickstart_cost, p.up_reserve_cost, p.down_reserve_cost]
    )


def with_dynamic_params(p, vec):
    vec = np.asarray(vec, dtype=float)
    I, J = p.num_units, p.num_quickstart
    if vec.size != 3 * I + J:
        raise ValueError(f"expected {3 * I + J} dynamic entries, got {vec.size}")
    return replace(
        p,
        energy_cost=vec[:I].copy(),
        quickstart_cost=vec[I : I + J].copy(),
        up_reserve_cost=vec[I + J : 2 * I + J].copy(),
        down_reserve_cost=vec[2 * I + J :].copy(),
    )


def load_network_csv(nodes_path, lines_path, units_path):
    """Read a network from the documented CSV trio.

    nodes.csv:  id
    lines.csv:  from,to,reactance,capacity
    units.csv:  node,kind,...unit parameters... (kind: slow | quickstart)

    Returns (NetworkSpec-building pieces) as a dict; the caller merges
    them with cost data from the run config.
    """
    import csv

    def read(path):
        with open(path, newline="") as fh:
            return list(csv.DictReader(fh))

    nodes = read(nodes_path)
    ids = sorted(int(r["id"]) for r in nodes)
    if ids != list(range(len(ids))):
        raise ValueError("node ids must be 0..N-1")
    lines = [
        (int(r["from"]), int(r["to"]), float(r["reactance"]), float(r["capacity"]))
        for r in read(lines_path)
    ]
    units = read(units_path)
    slow = [r for r in units if r["kind"] == "slow"]
    quick = [r for r in units if r["kind"] == "quickstart"]
    return {
        "node_count": len(ids),
        "lines": lines,
        "slow_units": slow,
        "quickstart_units": quick,
    }
