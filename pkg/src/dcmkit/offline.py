"""Offline solvers: exact joint optimum, brute-force oracles, and the
per-unit decomposition (server slices and generator slices).

The joint problem is a shortest path over layered states (x, y) per slot with
switching costs on increases only; a dynamic program over layers is the
default and a Dijkstra variant is kept behind a flag. The decomposition
splits provisioning into M unit server slices solved by a break-even rule and
supply into N unit generator slices solved by tracking a clamped cumulative
savings process.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, ConfigError
from .model import (
    GeneratorModel,
    Instance,
    Schedule,
    demand_series,
    dispatched_schedule,
    supply_cost,
)

DEFAULT_STATE_BUDGET = 5_000_000
DEFAULT_ENUM_BUDGET = 10_000_000


# ---------------------------------------------------------------------------
# shared pieces


def _psi_table(instance: Instance, t: int) -> np.ndarray:
    """Per-slot supply cost for every state: entry [x, y] = psi(y, p(t), d_t(x))."""
    d = instance.demand_table(t)[:, None]
    gen = instance.generator
    p = instance.p(t)
    y = np.arange(gen.count + 1, dtype=float)[None, :]
    cap = gen.capacity * y
    if p <= gen.c_o:
        return gen.c_m * y + p * d
    return np.where(
        d > cap,
        gen.c_m * y + gen.c_o * cap + p * (d - cap),
        gen.c_m * y + gen.c_o * d,
    )


def positive_increases(series) -> float:
    """Sum of positive one-step increases, counting the all-off start state."""
    arr = np.asarray(series, dtype=float)
    return float(np.diff(np.concatenate(([0.0], arr))).clip(min=0.0).sum())


def cp_cost(instance: Instance, x) -> float:
    """Provisioning-side objective: grid-priced demand plus server switching."""
    x = np.asarray(x, dtype=float)
    need = np.ceil(instance.workload)
    if np.any(x < need):
        t = int(np.argmax(x < need)) + 1
        raise ConfigError(f"slot {t}: fleet {x[t - 1]} below required {need[t - 1]}")
    energy = float(np.dot(instance.price, demand_series(instance, x)))
    return energy + instance.server.beta_s * positive_increases(x)


def ep_cost(gen: GeneratorModel, energy, price, y) -> float:
    """Supply-side objective: per-slot supply cost plus generator startups."""
    energy = np.asarray(energy, dtype=float)
    price = np.asarray(price, dtype=float)
    y = np.asarray(y, dtype=float)
    total = sum(
        supply_cost(gen, int(y[k]), float(price[k]), float(energy[k]))
        for k in range(len(energy))
    )
    return float(total) + gen.beta_g * positive_increases(y)


# ---------------------------------------------------------------------------
# joint exact solvers


def _min_increase_transform(values: np.ndarray, beta: float) -> np.ndarray:
    """B[i] = min_j values[j] + beta * max(0, j - i), along axis 0."""
    n = values.shape[0]
    idx = beta * np.arange(n, dtype=float).reshape((n,) + (1,) * (values.ndim - 1))
    up = np.minimum.accumulate((values + idx)[::-1], axis=0)[::-1] - idx
    down = np.minimum.accumulate(values, axis=0)
    return np.minimum(up, down)


def _successor_transform(j_next: np.ndarray, beta_s: float, beta_g: float) -> np.ndarray:
    """min over successor states of j_next + switching cost from (x, y)."""
    b = _min_increase_transform(j_next, beta_s)
    return _min_increase_transform(b.T, beta_g).T


def solve_dcm_offline(
    instance: Instance,
    method: str = "dp",
    state_budget: int = DEFAULT_STATE_BUDGET,
) -> Schedule:
    """Exact minimum-cost schedule via layered shortest path.

    method "dp" runs a backward dynamic program with O(M*N) work per layer;
    "dijkstra" explores the same graph with a heap (kept for cross-checking,
    much slower). Ties resolve to the lexicographically smallest x series,
    then y series.
    """
    m, n, t_end = instance.max_servers, instance.generator.count, instance.horizon
    states = (m + 1) * (n + 1) * (t_end + 2)
    if states > state_budget:
        raise CapacityError(
            f"state graph needs {states} nodes, budget is {state_budget}; "
            "use the decomposed pipeline instead"
        )
    if method == "dijkstra":
        return _dcm_dijkstra(instance)
    if method != "dp":
        raise ConfigError(f"unknown method {method!r}")

    beta_s, beta_g = instance.server.beta_s, instance.generator.beta_g
    # backward pass: value[t][x, y] = cheapest completion from state (x,y) at slot t
    value: list[np.ndarray | None] = [None] * (t_end + 2)
    value[t_end + 1] = np.zeros((m + 1, n + 1))
    for t in range(t_end, 0, -1):
        stage = _psi_table(instance, t)
        lo = instance.min_servers(t)
        if lo > 0:
            stage = stage.copy()
            stage[:lo, :] = np.inf
        value[t] = stage + _successor_transform(value[t + 1], beta_s, beta_g)

    # forward pass: walk the argmin, scanning x-major so equal-cost choices
    # pick the smallest (x, y)
    xs = np.empty(t_end)
    ys = np.empty(t_end)
    px = py = 0
    x_grid = np.arange(m + 1, dtype=float)[:, None]
    y_grid = np.arange(n + 1, dtype=float)[None, :]
    for t in range(1, t_end + 1):
        move = beta_s * np.clip(x_grid - px, 0.0, None) + beta_g * np.clip(y_grid - py, 0.0, None)
        flat = int(np.argmin(move + value[t]))
        px, py = divmod(flat, n + 1)
        xs[t - 1], ys[t - 1] = px, py
    return dispatched_schedule(instance, xs, ys)


def _dcm_dijkstra(instance: Instance) -> Schedule:
    m, n, t_end = instance.max_servers, instance.generator.count, instance.horizon
    edges = (m + 1) * (n + 1) * (m + 1) * (n + 1) * t_end
    if edges > 20_000_000:
        raise CapacityError(f"dijkstra edge count {edges} too large; use method='dp'")
    beta_s, beta_g = instance.server.beta_s, instance.generator.beta_g
    stages = [_psi_table(instance, t) for t in range(1, t_end + 1)]
    los = [instance.min_servers(t) for t in range(1, t_end + 1)]

    start = (0, 0, 0)  # (t, x, y)
    dist: dict[tuple[int, int, int], float] = {start: 0.0}
    parent: dict[tuple[int, int, int], tuple[int, int, int]] = {}
    heap: list[tuple[float, tuple[int, int, int]]] = [(0.0, start)]
    goal = None
    while heap:
        d0, node = heapq.heappop(heap)
        if d0 > dist.get(node, math.inf):
            continue
        t, x, y = node
        if t == t_end:
            goal = node
            break
        stage = stages[t]  # costs for slot t+1
        for nx in range(los[t], m + 1):
            for ny in range(n + 1):
                w = (
                    beta_s * max(0, nx - x)
                    + beta_g * max(0, ny - y)
                    + float(stage[nx, ny])
                )
                nxt = (t + 1, nx, ny)
                nd = d0 + w
                if nd < dist.get(nxt, math.inf):
                    dist[nxt] = nd
                    parent[nxt] = node
                    heapq.heappush(heap, (nd, nxt))
    assert goal is not None
    xs, ys = [], []
    node = goal
    while node != start:
        xs.append(node[1])
        ys.append(node[2])
        node = parent[node]
    return dispatched_schedule(instance, xs[::-1], ys[::-1])


def brute_force_dcm(instance: Instance, budget: int = DEFAULT_ENUM_BUDGET) -> Schedule:
    """Exhaustive minimum over all feasible (x, y) trajectories.

    Oracle for tiny instances only; ties resolve to the lexicographically
    smallest x series, then y series (enumeration order).
    """
    m, n, t_end = instance.max_servers, instance.generator.count, instance.horizon
    x_ranges = [range(instance.min_servers(t), m + 1) for t in range(1, t_end + 1)]
    n_x = math.prod(len(r) for r in x_ranges)
    n_y = (n + 1) ** t_end
    if n_x * n_y > budget:
        raise CapacityError(f"enumeration size {n_x * n_y} exceeds budget {budget}")

    xt = np.array(list(itertools.product(*x_ranges)), dtype=int).reshape(n_x, t_end)
    yt = np.array(list(itertools.product(range(n + 1), repeat=t_end)), dtype=int).reshape(
        n_y, t_end
    )
    cost = np.zeros((n_x, n_y))
    for t in range(1, t_end + 1):
        psi = _psi_table(instance, t)
        cost += psi[xt[:, t - 1][:, None], yt[:, t - 1][None, :]]
    beta_s, beta_g = instance.server.beta_s, instance.generator.beta_g
    sw_x = beta_s * np.diff(np.hstack([np.zeros((n_x, 1), dtype=int), xt]), axis=1).clip(
        min=0
    ).sum(axis=1)
    sw_y = beta_g * np.diff(np.hstack([np.zeros((n_y, 1), dtype=int), yt]), axis=1).clip(
        min=0
    ).sum(axis=1)
    cost += sw_x[:, None] + sw_y[None, :]
    ix, iy = np.argwhere(cost == cost.min())[0]  # row-major: smallest x then y series
    return dispatched_schedule(instance, xt[ix], yt[iy])


# ---------------------------------------------------------------------------
# provisioning decomposition (server slices)


def slice_workload(workload, i: int) -> np.ndarray:
    """Unit workload slice i: a_i(t) = min(1, max(0, a(t) - (i-1)))."""
    if i < 1:
        raise ValueError(f"slice index must be >= 1, got {i}")
    return np.clip(np.asarray(workload, dtype=float) - (i - 1), 0.0, 1.0)


def marginal_demand_matrix(instance: Instance) -> np.ndarray:
    """Matrix [t-1, i-1] = d_t(i) - d_t(i-1) for all slots and server slices."""
    tables = np.stack([instance.demand_table(t) for t in range(1, instance.horizon + 1)])
    return np.diff(tables, axis=1)


def cpoff_slice(slice_workload_series, price, marginal, beta_s: float) -> np.ndarray:
    """Optimal on/off series for one unit server slice.

    On wherever the slice has workload. In an idle gap between busy slots the
    slice stays on iff the idle energy cost over the gap is below the restart
    cost beta_s (a tie turns off). Leading and trailing idle runs are off.
    """
    a_i = np.asarray(slice_workload_series, dtype=float)
    price = np.asarray(price, dtype=float)
    marginal = np.asarray(marginal, dtype=float)
    busy = a_i > 0.0
    x = busy.astype(float)
    if not busy.any():
        return x
    first = int(busy.argmax())
    last = len(busy) - 1 - int(busy[::-1].argmax())
    idle_cost = price * marginal
    j = first + 1
    while j < last:
        if busy[j]:
            j += 1
            continue
        k = j
        while not busy[k]:
            k += 1
        if idle_cost[j:k].sum() < beta_s:
            x[j:k] = 1.0
        j = k
    return x


def cp_offline_slices(instance: Instance) -> np.ndarray:
    """Per-slice optimal series, shape (max_servers, horizon)."""
    m = instance.max_servers
    if m == 0:
        return np.zeros((0, instance.horizon))
    marg = marginal_demand_matrix(instance)
    return np.stack(
        [
            cpoff_slice(
                slice_workload(instance.workload, i),
                instance.price,
                marg[:, i - 1],
                instance.server.beta_s,
            )
            for i in range(1, m + 1)
        ]
    )


def solve_cp_offline(instance: Instance) -> np.ndarray:
    """Optimal provisioning series as the sum of unit-slice optima."""
    slices = cp_offline_slices(instance)
    return slices.sum(axis=0) if len(slices) else np.zeros(instance.horizon)


def brute_force_cp(instance: Instance, budget: int = DEFAULT_ENUM_BUDGET) -> tuple[np.ndarray, float]:
    """Exhaustive minimum of the provisioning objective (oracle)."""
    m, t_end = instance.max_servers, instance.horizon
    ranges = [range(instance.min_servers(t), m + 1) for t in range(1, t_end + 1)]
    if math.prod(len(r) for r in ranges) > budget:
        raise CapacityError("provisioning enumeration exceeds budget")
    best_x, best = None, math.inf
    for combo in itertools.product(*ranges):
        c = cp_cost(instance, np.array(combo, dtype=float))
        if c < best:
            best_x, best = np.array(combo, dtype=float), c
    assert best_x is not None
    return best_x, best


# ---------------------------------------------------------------------------
# supply decomposition (generator slices)


def slice_energy(energy, i: int, capacity: float) -> np.ndarray:
    """Unit supply slice i: e_i(t) = min(L, max(0, e(t) - (i-1)L))."""
    if i < 1:
        raise ValueError(f"slice index must be >= 1, got {i}")
    return np.clip(np.asarray(energy, dtype=float) - (i - 1) * capacity, 0.0, capacity)


def regret_steps(gen: GeneratorModel, energy, price) -> np.ndarray:
    """Per-slot savings of one generator over the grid, psi(0) - psi(1)."""
    e = np.asarray(energy, dtype=float)
    p = np.asarray(price, dtype=float)
    covered = np.minimum(e, gen.capacity)
    return np.where(p <= gen.c_o, -gen.c_m, covered * (p - gen.c_o) - gen.c_m)


def clamped_regret(gain, beta_g: float) -> np.ndarray:
    """Cumulative savings clamped to [-beta_g, 0], starting at -beta_g."""
    gain = np.asarray(gain, dtype=float)
    out = np.empty(len(gain) + 1)
    out[0] = -beta_g
    r = -beta_g
    for k, g in enumerate(gain):
        r = min(0.0, max(-beta_g, r + g))
        out[k + 1] = r
    return out


@dataclass(frozen=True)
class Segment:
    """Inclusive slot range with a behavior kind: start, on, off, or end."""

    start: int
    end: int
    kind: str


def critical_segments(regret: np.ndarray, beta_g: float) -> list[Segment]:
    """Partition [1, T] by the last slots of each extreme-visit run.

    The clamped process starts at -beta_g. Maximal runs of visits to one
    extreme (with no opposite-extreme visit between them) end at critical
    slots; the stretch between consecutive critical slots is "on" when it
    carries the process from -beta_g up to 0 and "off" for the reverse.
    Before the first critical slot the process has never completed a
    traversal ("start"); after the last one it never reaches an extreme
    again ("end").
    """
    t_end = len(regret) - 1
    bottom = -beta_g
    runs: list[tuple[bool, int]] = []  # (at_top, last slot of run)
    at_top, last = False, 0  # slot 0 sits at the bottom
    for t in range(1, t_end + 1):
        v = regret[t]
        if v == 0.0:
            ext = True
        elif v == bottom:
            ext = False
        else:
            continue
        if ext == at_top:
            last = t
        else:
            runs.append((at_top, last))
            at_top, last = ext, t
    runs.append((at_top, last))

    segments: list[Segment] = []
    if runs[0][1] >= 1:
        segments.append(Segment(1, runs[0][1], "start"))
    for (left_top, left), (right_top, right) in zip(runs, runs[1:]):
        segments.append(Segment(left + 1, right, "on" if right_top else "off"))
    if runs[-1][1] < t_end:
        segments.append(Segment(runs[-1][1] + 1, t_end, "end"))
    return segments


@dataclass(frozen=True)
class RegretProcess:
    """Savings process for one generator slice and its segment structure."""

    gain: np.ndarray
    regret: np.ndarray  # length T+1, index 0 is the initial state
    segments: list[Segment]


def regret_process(gen: GeneratorModel, energy, price) -> RegretProcess:
    gain = regret_steps(gen, energy, price)
    regret = clamped_regret(gain, gen.beta_g)
    return RegretProcess(gain, regret, critical_segments(regret, gen.beta_g))


def ofa_ep_slice(gen: GeneratorModel, energy_slice, price) -> np.ndarray:
    """Optimal on/off series for one generator slice: on across every
    segment that carries the savings process from -beta_g up to 0."""
    proc = regret_process(gen, energy_slice, price)
    y = np.zeros(len(proc.gain))
    for seg in proc.segments:
        if seg.kind == "on":
            y[seg.start - 1 : seg.end] = 1.0
    return y


def ep_offline_slices(gen: GeneratorModel, energy, price) -> np.ndarray:
    """Per-slice optimal generator series, shape (count, horizon)."""
    if gen.count == 0:
        return np.zeros((0, len(np.asarray(energy))))
    return np.stack(
        [
            ofa_ep_slice(gen, slice_energy(energy, i, gen.capacity), price)
            for i in range(1, gen.count + 1)
        ]
    )


def solve_ep_offline(gen: GeneratorModel, energy, price) -> np.ndarray:
    """Optimal generator commitment as the sum of unit-slice optima."""
    slices = ep_offline_slices(gen, energy, price)
    return slices.sum(axis=0) if len(slices) else np.zeros(len(np.asarray(energy)))


def brute_force_ep(
    gen: GeneratorModel, energy, price, budget: int = DEFAULT_ENUM_BUDGET
) -> tuple[np.ndarray, float]:
    """Exhaustive minimum of the supply objective (oracle)."""
    t_end = len(np.asarray(energy))
    if (gen.count + 1) ** t_end > budget:
        raise CapacityError("supply enumeration exceeds budget")
    best_y, best = None, math.inf
    for combo in itertools.product(range(gen.count + 1), repeat=t_end):
        c = ep_cost(gen, energy, price, np.array(combo, dtype=float))
        if c < best:
            best_y, best = np.array(combo, dtype=float), c
    assert best_y is not None
    return best_y, best
