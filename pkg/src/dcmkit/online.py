"""Look-ahead online algorithms and their competitive-ratio bounds.

Provisioning (GCSR): each unit server slice idles through a workload gap
until the accumulated idle cost, plus what the look-ahead window shows is
still coming, proves a restart would have been cheaper; then it turns off.

Supply (CHASE): each unit generator slice tracks the clamped cumulative
savings of running versus buying from the grid and switches to whichever
extreme the window shows the process hitting next.

The combined pipeline (DCMON) feeds GCSR's provisioning decisions, computed
slightly ahead of the output slot, to CHASE as its energy demand. Every read
goes through a stream object that raises on any access past the revealed
window, so causality violations are structural errors rather than silent
bugs.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, LookaheadViolation
from .model import GeneratorModel, Instance, Schedule, dispatch

# ---------------------------------------------------------------------------
# revealed-window plumbing


class LookaheadStream:
    """Sequential view of an instance with a fixed look-ahead window.

    At cursor t, slots 1..min(T, t+w) are revealed. Reading any later slot
    raises LookaheadViolation; the cursor only moves forward.
    """

    def __init__(self, instance: Instance, lookahead: int):
        if lookahead < 0 or lookahead != int(lookahead):
            raise ConfigError(f"lookahead must be a nonnegative integer, got {lookahead}")
        self.instance = instance
        self.lookahead = int(lookahead)
        self._cursor = 1

    @property
    def cursor(self) -> int:
        return self._cursor

    @property
    def revealed_end(self) -> int:
        return min(self.instance.horizon, self._cursor + self.lookahead)

    def advance(self) -> None:
        if self._cursor <= self.instance.horizon:
            self._cursor += 1

    def _check(self, t: int) -> None:
        if not 1 <= t <= self.revealed_end:
            raise LookaheadViolation(
                f"slot {t} is outside the revealed window [1, {self.revealed_end}] "
                f"(cursor {self._cursor}, lookahead {self.lookahead})"
            )

    def workload(self, t: int) -> float:
        self._check(t)
        return self.instance.a(t)

    def price(self, t: int) -> float:
        self._check(t)
        return self.instance.p(t)

    def demand_table(self, t: int) -> np.ndarray:
        self._check(t)
        return self.instance.demand_table(t)

    def regime_name(self, t: int) -> str | None:
        self._check(t)
        reg = self.instance.cooling.regime_at(t)
        return None if reg is None else reg.name


# ---------------------------------------------------------------------------
# provisioning: GCSR


class GcsrFleet:
    """All unit server slices of one GCSR run, decided slot by slot.

    Slice state is the accumulated idle cost C_i and the previous on/off
    decision; C_i accrues only while a slice idles in the on state and resets
    on every busy slot and every turn-off. Revealed data is cached as prefix
    sums so the break-even scan inside the window is a binary search.
    """

    def __init__(self, stream: LookaheadStream):
        self.stream = stream
        self.n_slices = stream.instance.max_servers
        self.beta_s = stream.instance.server.beta_s
        self._acc = [0.0] * self.n_slices  # C_i
        self._on = [0] * self.n_slices
        # prefix[i][t] = sum of idle cost p*d_i over slots 1..t (index 0 = 0)
        self._prefix: list[list[float]] = [[0.0] for _ in range(self.n_slices)]
        self._busy: list[list[bool]] = [[] for _ in range(self.n_slices)]
        self._cached = 0
        self.next_slot = 1
        self.series: list[int] = []
        self.slice_series: list[list[int]] = [[] for _ in range(self.n_slices)]

    def _cache_to(self, end: int) -> None:
        while self._cached < end:
            t = self._cached + 1
            table = self.stream.demand_table(t)
            a = self.stream.workload(t)
            p = self.stream.price(t)
            for i in range(self.n_slices):
                inc = float(table[i + 1] - table[i])
                self._prefix[i].append(self._prefix[i][-1] + p * inc)
                self._busy[i].append(a > i)
            self._cached = t

    def decide_next(self, window_end: int) -> int:
        """Decide slot self.next_slot using revealed data up to window_end."""
        t = self.next_slot
        window_end = min(window_end, self.stream.instance.horizon)
        if window_end < t:
            raise LookaheadViolation(f"window end {window_end} precedes decision slot {t}")
        self._cache_to(window_end)
        total = 0
        for i in range(self.n_slices):
            pref = self._prefix[i]
            busy = self._busy[i]
            if busy[t - 1]:
                on = 1
                self._acc[i] = 0.0
            else:
                # earliest slot in [t, window_end] where accumulated idle cost
                # would reach the restart cost
                target = self.beta_s - self._acc[i] + pref[t - 1]
                hit = bisect_left(pref, target, lo=t, hi=window_end + 1)
                if hit > window_end or any(busy[t - 1 : hit]):
                    on = self._on[i]
                    self._acc[i] += (pref[t] - pref[t - 1]) * on
                else:
                    on = 0
                    self._acc[i] = 0.0
            self._on[i] = on
            self.slice_series[i].append(on)
            total += on
        self.series.append(total)
        self.next_slot += 1
        return total


def gcsr(instance: Instance, lookahead: int, return_slices: bool = False):
    """Run GCSR over the whole horizon; returns the provisioning series."""
    stream = LookaheadStream(instance, lookahead)
    fleet = GcsrFleet(stream)
    for _ in range(instance.horizon):
        fleet.decide_next(stream.revealed_end)
        stream.advance()
    x = np.array(fleet.series, dtype=float)
    if return_slices:
        slices = np.array(fleet.slice_series, dtype=float).reshape(
            fleet.n_slices, instance.horizon
        )
        return x, slices
    return x


# ---------------------------------------------------------------------------
# supply: CHASE


class ChaseFleet:
    """All unit generator slices of one CHASE run.

    Each slice keeps its committed clamped savings value R_i(t-1); on every
    decision it rolls the process forward across the revealed window and
    switches to the extreme hit first, holding if neither is visible.
    """

    def __init__(self, gen: GeneratorModel, energy_at, price_at):
        self.gen = gen
        self.energy_at = energy_at  # callable slot -> revealed energy demand
        self.price_at = price_at
        self._regret = [-gen.beta_g] * gen.count
        self._on = [0] * gen.count
        self.next_slot = 1
        self.series: list[int] = []
        self.slice_series: list[list[int]] = [[] for _ in range(gen.count)]

    def _gain(self, i: int, t: int) -> float:
        e = self.energy_at(t)
        p = self.price_at(t)
        cap = self.gen.capacity
        e_i = min(cap, max(0.0, e - i * cap))
        if p <= self.gen.c_o:
            return -self.gen.c_m
        return min(e_i, cap) * (p - self.gen.c_o) - self.gen.c_m

    def decide_next(self, window_end: int) -> int:
        t = self.next_slot
        if window_end < t:
            raise LookaheadViolation(f"window end {window_end} precedes decision slot {t}")
        bottom = -self.gen.beta_g
        total = 0
        for i in range(self.gen.count):
            r = self._regret[i]
            verdict = None
            for tau in range(t, window_end + 1):
                r = min(0.0, max(bottom, r + self._gain(i, tau)))
                if r == 0.0:
                    verdict = 1
                    break
                if r == bottom:
                    verdict = 0
                    break
            on = self._on[i] if verdict is None else verdict
            self._regret[i] = min(0.0, max(bottom, self._regret[i] + self._gain(i, t)))
            self._on[i] = on
            self.slice_series[i].append(on)
            total += on
        self.series.append(total)
        self.next_slot += 1
        return total


def chase(
    gen: GeneratorModel,
    energy,
    price,
    lookahead: int,
    return_slices: bool = False,
):
    """Run CHASE on an energy-demand series; returns the commitment series."""
    if lookahead < 0:
        raise ConfigError(f"lookahead must be nonnegative, got {lookahead}")
    energy = np.asarray(energy, dtype=float)
    price = np.asarray(price, dtype=float)
    t_end = len(energy)
    limit = {"end": 0}

    def energy_at(t: int) -> float:
        if not 1 <= t <= limit["end"]:
            raise LookaheadViolation(f"slot {t} beyond revealed window [1, {limit['end']}]")
        return float(energy[t - 1])

    def price_at(t: int) -> float:
        if not 1 <= t <= limit["end"]:
            raise LookaheadViolation(f"slot {t} beyond revealed window [1, {limit['end']}]")
        return float(price[t - 1])

    fleet = ChaseFleet(gen, energy_at, price_at)
    for t in range(1, t_end + 1):
        limit["end"] = min(t + lookahead, t_end)
        fleet.decide_next(limit["end"])
    y = np.array(fleet.series, dtype=float)
    if return_slices:
        return y, np.array(fleet.slice_series, dtype=float).reshape(gen.count, t_end)
    return y


# ---------------------------------------------------------------------------
# combined pipeline: DCMON


def ep_lookahead(instance: Instance, lookahead: int) -> int:
    """Supply-side window left after the provisioning stage runs ahead.

    The provisioning stage needs up to the break-even window of look-ahead
    for itself; only the surplus is usable downstream. An infinite
    break-even window (zero idle cost floor) leaves nothing.
    """
    span = instance.breakeven_idle_window()
    if math.isinf(span) or lookahead <= span:
        return 0
    return int(math.floor(lookahead - span))


def dcmon(instance: Instance, lookahead: int, ep_window: int | None = None) -> Schedule:
    """Run the full online pipeline and return a complete schedule.

    GCSR decides provisioning up to ep_window slots ahead of the output
    cursor (its break-even scans clipped to the master window, which changes
    nothing once the surplus exists), the induced energy demand feeds CHASE,
    and the dispatch rule completes each slot.

    ep_window is the supply stage's look-ahead, an algorithm parameter
    normally derived from the break-even span; pass it explicitly when
    replaying a truncated view of an instance, since the derivation reads
    the price floor off the series.
    """
    t_end = instance.horizon
    gen = instance.generator
    stream = LookaheadStream(instance, lookahead)
    fleet = GcsrFleet(stream)
    w_ep = ep_lookahead(instance, lookahead) if ep_window is None else ep_window
    if not 0 <= w_ep <= lookahead:
        raise ConfigError(f"ep_window must lie in [0, {lookahead}], got {w_ep}")

    energy: list[float] = []  # energy[k] = demand at slot k+1 under GCSR fleet
    limit = {"end": 0}

    def energy_at(t: int) -> float:
        if not 1 <= t <= limit["end"] or t > len(energy):
            raise LookaheadViolation(f"slot {t} beyond revealed window [1, {limit['end']}]")
        return energy[t - 1]

    def price_at(t: int) -> float:
        if not 1 <= t <= limit["end"]:
            raise LookaheadViolation(f"slot {t} beyond revealed window [1, {limit['end']}]")
        return stream.price(t)

    supply = ChaseFleet(gen, energy_at, price_at)
    xs = np.empty(t_end)
    ys = np.empty(t_end)
    us = np.empty(t_end)
    vs = np.empty(t_end)
    for t in range(1, t_end + 1):
        ahead = min(t + w_ep, t_end)
        while fleet.next_slot <= ahead:
            tau = fleet.next_slot
            x_tau = fleet.decide_next(stream.revealed_end)
            energy.append(float(stream.demand_table(tau)[x_tau]))
        limit["end"] = ahead
        y_t = supply.decide_next(ahead)
        x_t = fleet.series[t - 1]
        u, v = dispatch(gen, y_t, stream.price(t), energy[t - 1])
        xs[t - 1], ys[t - 1], us[t - 1], vs[t - 1] = x_t, y_t, u, v
        stream.advance()
    return Schedule(x=xs, y=ys, u=us, v=vs)


# ---------------------------------------------------------------------------
# competitive-ratio bounds


@dataclass(frozen=True)
class BoundParams:
    """Everything the closed-form ratio bounds need to know about a model."""

    beta_s: float
    beta_g: float
    c_o: float
    c_m: float
    capacity: float
    p_min: float
    p_max: float
    d_min: float

    def __post_init__(self) -> None:
        if min(self.beta_s, self.beta_g, self.capacity) <= 0.0:
            raise ConfigError("beta_s, beta_g, capacity must be positive")
        if min(self.c_o, self.c_m, self.p_min, self.d_min) < 0.0:
            raise ConfigError("costs, prices, and d_min must be nonnegative")
        if self.c_o + self.c_m / self.capacity >= self.p_max:
            raise ConfigError(
                "bounds require economical generation: c_o + c_m/capacity < p_max "
                f"({self.c_o + self.c_m / self.capacity:.6g} >= {self.p_max:.6g})"
            )

    @classmethod
    def from_instance(cls, instance: Instance) -> "BoundParams":
        return cls(
            beta_s=instance.server.beta_s,
            beta_g=instance.generator.beta_g,
            c_o=instance.generator.c_o,
            c_m=instance.generator.c_m,
            capacity=instance.generator.capacity,
            p_min=instance.p_min,
            p_max=instance.p_max,
            d_min=instance.min_marginal_demand(),
        )

    @property
    def breakeven_idle_window(self) -> float:
        denom = self.d_min * self.p_min
        return math.inf if denom <= 0.0 else self.beta_s / denom


def lookahead_coverage(lookahead: int, params: BoundParams) -> float:
    """Fraction of the break-even idle window the look-ahead covers, in [0, 1]."""
    return min(1.0, lookahead * params.d_min * params.p_min / params.beta_s)


def ratio_bound_ongrid(lookahead: int, params: BoundParams) -> float:
    """Worst-case GCSR / offline ratio for grid-only provisioning."""
    return 2.0 - lookahead_coverage(lookahead, params)


def ongrid_bound_from_instance(instance: Instance, lookahead: int) -> float:
    """Grid-only GCSR bound straight from an instance (no generator needed)."""
    span = instance.breakeven_idle_window()
    cov = 0.0 if math.isinf(span) else min(1.0, lookahead / span)
    return 2.0 - cov


def ratio_bound_ep(lookahead: int, params: BoundParams) -> float:
    """Worst-case CHASE / offline ratio for the supply subproblem."""
    cap, p = params.capacity, params.p_max
    margin = cap * p - cap * params.c_o - params.c_m
    denom = params.beta_g * cap * p + lookahead * params.c_m * p * (
        cap - params.c_m / (p - params.c_o)
    )
    return 1.0 + 2.0 * params.beta_g * margin / denom


def _ep_surplus(lookahead: int, params: BoundParams) -> int:
    span = params.breakeven_idle_window
    if math.isinf(span) or lookahead <= span:
        return 0
    return int(math.floor(lookahead - span))


def ratio_bound_hybrid(lookahead: int, params: BoundParams) -> float:
    """Worst-case pipeline / joint-offline ratio for hybrid supply."""
    cap, p = params.capacity, params.p_max
    alpha_g = params.c_m * _ep_surplus(lookahead, params) / params.beta_g
    margin = cap * p - cap * params.c_o - params.c_m
    bracket = 1.0 + 2.0 * margin / (
        cap * p + alpha_g * p * (cap - params.c_m / (p - params.c_o))
    )
    return (p * (2.0 - lookahead_coverage(lookahead, params)) / (params.c_o + params.c_m / cap)) * bracket


def ratio_bound_hybrid_loose(lookahead: int, params: BoundParams) -> float:
    """Simpler, weaker form of the hybrid bound (no-look-ahead tabletop form)."""
    p = params.p_max
    alpha_g = params.c_m * _ep_surplus(lookahead, params) / params.beta_g
    head = p * (2.0 - lookahead_coverage(lookahead, params)) / (params.c_o + params.c_m / params.capacity)
    return head * (1.0 + 2.0 * (p - params.c_o) / p / (1.0 + alpha_g))


def rho_decomposition(params: BoundParams) -> float:
    """Worst-case cost inflation of solving provisioning before supply."""
    return params.capacity * params.p_max / (params.capacity * params.c_o + params.c_m)


# ---------------------------------------------------------------------------
# slice-level helpers for structural checks


def ep_slices_from_series(gen: GeneratorModel, energy, price, lookahead: int) -> np.ndarray:
    """CHASE per-slice series (count, T); thin wrapper used by audits."""
    _, slices = chase(gen, energy, price, lookahead, return_slices=True)
    return slices


def gcsr_demand_series(instance: Instance, x) -> np.ndarray:
    """Energy demand induced by a provisioning series (vectorized)."""
    from .model import demand_series

    return demand_series(instance, x)
