"""Core cost model for a data center with on-site generation.

A problem instance couples a workload trace a(t) (active servers, fractional)
and an electricity price trace p(t) with four device models:

* servers: aggregate power b = c_idle*x + (c_peak - c_idle)*a for x powered-on
  servers serving workload a,
* cooling and power conditioning: overheads as convex polynomials of b,
  evaluated in normalized units b/b_max and scaled back by b_max,
* generators: N identical units of capacity L with incremental cost c_o per
  kWh, maintenance cost c_m per active slot, and startup cost beta_g.

Slots are of unit length, so power (kW) and energy (kWh) coincide and a single
demand number d_t(x) per slot captures everything downstream solvers need.

All dataclasses are frozen and arrays are marked read-only: instances can be
shared freely between threads and memoized solvers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, FeasibilityError

# Absolute tolerance for feasibility comparisons on continuous quantities.
FEAS_TOL = 1e-9


# ---------------------------------------------------------------------------
# device models


@dataclass(frozen=True)
class ServerModel:
    """Linear server power model with switching cost.

    Attributes:
        c_idle: idle power draw per powered-on server (kW), >= 0.
        c_peak: power draw of a fully utilized server (kW), >= c_idle.
        beta_s: cost of turning one server on, > 0.
    """

    c_idle: float
    c_peak: float
    beta_s: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.c_idle <= self.c_peak:
            raise ConfigError(
                f"need 0 <= c_idle <= c_peak, got c_idle={self.c_idle}, c_peak={self.c_peak}"
            )
        if self.beta_s <= 0.0:
            raise ConfigError(f"beta_s must be positive, got {self.beta_s}")

    @property
    def peak_power_factor(self) -> float:
        """Fraction of peak power attributable to load, (c_peak - c_idle)/c_peak."""
        if self.c_peak == 0.0:
            return 0.0
        return (self.c_peak - self.c_idle) / self.c_peak


@dataclass(frozen=True)
class GeneratorModel:
    """A fleet of N identical on-site generators.

    Attributes:
        capacity: output cap L per active generator (kW), > 0.
        c_o: incremental generation cost per kWh.
        c_m: maintenance cost per generator per active slot.
        beta_g: cost of starting one generator, > 0.
        count: fleet size N, >= 0.
    """

    capacity: float
    c_o: float
    c_m: float
    beta_g: float
    count: int

    def __post_init__(self) -> None:
        if self.capacity <= 0.0:
            raise ConfigError(f"generator capacity must be positive, got {self.capacity}")
        if self.c_o < 0.0 or self.c_m < 0.0:
            raise ConfigError("generator costs c_o, c_m must be nonnegative")
        if self.beta_g <= 0.0:
            raise ConfigError(f"beta_g must be positive, got {self.beta_g}")
        if self.count < 0 or self.count != int(self.count):
            raise ConfigError(f"generator count must be a nonnegative integer, got {self.count}")

    @property
    def breakeven_price(self) -> float:
        """Grid price above which a fully loaded generator is economical."""
        return self.c_o + self.c_m / self.capacity


@dataclass(frozen=True)
class CoolingRegime:
    """One cooling operating regime, active on period hours [start, end).

    The interval is half-open modulo the period, so start=20, end=8 covers
    the wrap-around night hours. Coefficients apply to normalized power
    b_hat = b/b_max: quadratic kind uses (quad, lin, const), cubic uses
    (cube,).
    """

    name: str
    start: int
    end: int
    coeffs: tuple[float, ...]

    def contains(self, hour: int, period: int) -> bool:
        h = hour % period
        if self.start == self.end:  # full-period regime
            return True
        if self.start < self.end:
            return self.start <= h < self.end
        return h >= self.start or h < self.end


@dataclass(frozen=True)
class CoolingModel:
    """Cooling overhead as a convex polynomial of normalized server power.

    kind "none" has no overhead; "quadratic" regimes carry (quad, lin, const)
    coefficients, "cubic" regimes carry a single leading coefficient. The
    polynomial is evaluated at b/b_max and the result scaled by b_max.
    """

    kind: str = "none"
    regimes: tuple[CoolingRegime, ...] = ()
    b_max: float = 1.0
    period: int = 24

    def __post_init__(self) -> None:
        if self.kind not in ("none", "quadratic", "cubic"):
            raise ConfigError(f"unknown cooling kind {self.kind!r}")
        if self.kind == "none":
            return
        if self.b_max <= 0.0:
            raise ConfigError("cooling b_max must be positive")
        if self.period <= 0:
            raise ConfigError("cooling period must be positive")
        if not self.regimes:
            raise ConfigError(f"cooling kind {self.kind!r} requires at least one regime")
        n_coef = 3 if self.kind == "quadratic" else 1
        for reg in self.regimes:
            if len(reg.coeffs) != n_coef:
                raise ConfigError(
                    f"regime {reg.name!r}: expected {n_coef} coefficients, got {len(reg.coeffs)}"
                )
            if any(c < 0.0 for c in reg.coeffs):
                raise ConfigError(f"regime {reg.name!r}: coefficients must be nonnegative")
        # every hour of the period must belong to exactly one regime
        for h in range(self.period):
            owners = [r.name for r in self.regimes if r.contains(h, self.period)]
            if len(owners) != 1:
                raise ConfigError(
                    f"hour {h} covered by {len(owners)} cooling regimes ({owners}); need exactly 1"
                )

    def regime_at(self, t: int) -> CoolingRegime | None:
        """Regime active in slot t (slots are 1-based, slot 1 = hour 0)."""
        if self.kind == "none":
            return None
        return next(r for r in self.regimes if r.contains((t - 1) % self.period, self.period))

    def power(self, b: float | np.ndarray, t: int) -> float | np.ndarray:
        """Cooling power for aggregate server power b in slot t."""
        if self.kind == "none":
            return np.zeros_like(b) if isinstance(b, np.ndarray) else 0.0
        bh = b / self.b_max
        reg = self.regime_at(t)
        assert reg is not None
        if self.kind == "quadratic":
            q, l, c = reg.coeffs
            return (q * bh * bh + l * bh + c) * self.b_max
        return reg.coeffs[0] * bh * bh * bh * self.b_max


@dataclass(frozen=True)
class ConditioningModel:
    """Power conditioning overhead, time-invariant quadratic in b/b_max."""

    kind: str = "none"
    quad: float = 0.0
    lin: float = 0.0
    const: float = 0.0
    b_max: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("none", "quadratic"):
            raise ConfigError(f"unknown conditioning kind {self.kind!r}")
        if self.kind == "none":
            return
        if self.b_max <= 0.0:
            raise ConfigError("conditioning b_max must be positive")
        if min(self.quad, self.lin, self.const) < 0.0:
            raise ConfigError("conditioning coefficients must be nonnegative")

    def power(self, b: float | np.ndarray) -> float | np.ndarray:
        if self.kind == "none":
            return np.zeros_like(b) if isinstance(b, np.ndarray) else 0.0
        bh = b / self.b_max
        return (self.quad * bh * bh + self.lin * bh + self.const) * self.b_max


# ---------------------------------------------------------------------------
# instance


def _frozen_array(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float).copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Instance:
    """A complete scheduling problem over a finite horizon.

    workload and price are 1-based conceptually: series index k holds slot
    t = k+1. Accessor methods take slot numbers, so off-by-one handling stays
    in one place.
    """

    workload: np.ndarray
    price: np.ndarray
    server: ServerModel
    generator: GeneratorModel
    cooling: CoolingModel = CoolingModel()
    conditioning: ConditioningModel = ConditioningModel()
    label: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "workload", _frozen_array(self.workload))
        object.__setattr__(self, "price", _frozen_array(self.price))
        if self.workload.ndim != 1 or self.price.ndim != 1:
            raise ConfigError("workload and price must be 1-d series")
        if len(self.workload) != len(self.price):
            raise ConfigError(
                f"series length mismatch: {len(self.workload)} workload vs {len(self.price)} price"
            )
        if len(self.workload) == 0:
            raise ConfigError("horizon must have at least one slot")
        if np.any(self.workload < 0.0):
            raise ConfigError("workload must be nonnegative")
        if np.any(self.price < 0.0):
            raise ConfigError("prices must be nonnegative")
        if self.generator.count >= 1 and self.generator.breakeven_price >= self.p_max:
            raise ConfigError(
                "uneconomical generators: need c_o + c_m/capacity < max price "
                f"({self.generator.breakeven_price:.6g} >= {self.p_max:.6g})"
            )

    # -- basic dimensions ---------------------------------------------------

    @property
    def horizon(self) -> int:
        return len(self.workload)

    @property
    def max_servers(self) -> int:
        """Largest fleet any slot requires, max_t ceil(a(t))."""
        return int(max(math.ceil(a) for a in self.workload))

    @property
    def p_min(self) -> float:
        return float(self.price.min())

    @property
    def p_max(self) -> float:
        return float(self.price.max())

    # -- per-slot series access (1-based slots) -----------------------------

    def a(self, t: int) -> float:
        return float(self.workload[t - 1])

    def p(self, t: int) -> float:
        return float(self.price[t - 1])

    def min_servers(self, t: int) -> int:
        return int(math.ceil(self.workload[t - 1]))

    # -- demand -------------------------------------------------------------

    def raw_demand(self, t: int, x: float | np.ndarray) -> float | np.ndarray:
        """d_t(x) without the x >= ceil(a) feasibility gate.

        Marginal-demand series and dynamic programs evaluate the demand
        polynomial below the feasible fleet size; the formula is well defined
        for any x >= 0.
        """
        srv = self.server
        b = srv.c_idle * x + (srv.c_peak - srv.c_idle) * self.workload[t - 1]
        return b + self.conditioning.power(b) + self.cooling.power(b, t)

    def demand_table(self, t: int) -> np.ndarray:
        """Vector of d_t(x) for x = 0..max_servers (read-only)."""
        table = self.raw_demand(t, np.arange(self.max_servers + 1, dtype=float))
        out = np.asarray(table, dtype=float)
        out.setflags(write=False)
        return out

    def marginal_demand(self, t: int, i: int) -> float:
        """Per-unit demand increment d_t(i) - d_t(i-1) for unit i >= 1."""
        if i < 1:
            raise ValueError(f"unit index must be >= 1, got {i}")
        return float(self.raw_demand(t, float(i)) - self.raw_demand(t, float(i - 1)))

    def min_marginal_demand(self) -> float:
        """Model-wide lower bound on any demand increment.

        Computed at the zero-workload reference (b from 0 to c_idle), where
        convexity makes the first increment smallest, minimized over cooling
        regimes. Known a priori from the declared model family, so online
        algorithms may use it without seeing the trace.
        """
        srv = self.server
        b0, b1 = 0.0, srv.c_idle
        base = b1 - b0 + float(self.conditioning.power(b1) - self.conditioning.power(b0))
        if self.cooling.kind == "none":
            return base
        slots = {}
        for h in range(self.cooling.period):
            reg = next(r for r in self.cooling.regimes if r.contains(h, self.cooling.period))
            slots.setdefault(reg.name, h + 1)
        deltas = [
            float(self.cooling.power(b1, t) - self.cooling.power(b0, t)) for t in slots.values()
        ]
        return base + min(deltas)

    def breakeven_idle_window(self) -> float:
        """Slots of cheapest idling that add up to one server start, beta_s/(d_min*P_min).

        Infinite when either factor is zero (a look-ahead window can then
        never certify a turn-off).
        """
        denom = self.min_marginal_demand() * self.p_min
        if denom <= 0.0:
            return math.inf
        return self.server.beta_s / denom

    def truncated(self, length: int) -> "Instance":
        """Prefix instance over slots 1..length (used by causality audits).

        Construction-time validation is inherited from the parent rather
        than re-run: a prefix can lower the realized price peak below the
        generator break-even point, which would wrongly reject a replay
        view of a perfectly valid instance.
        """
        if not 1 <= length <= self.horizon:
            raise ValueError(f"length must be in [1, {self.horizon}], got {length}")
        clone = object.__new__(Instance)
        object.__setattr__(clone, "workload", self.workload[:length])
        object.__setattr__(clone, "price", self.price[:length])
        for name in ("server", "generator", "cooling", "conditioning", "label"):
            object.__setattr__(clone, name, getattr(self, name))
        return clone

    def with_generator_count(self, count: int) -> "Instance":
        gen = self.generator
        return Instance(
            workload=self.workload,
            price=self.price,
            server=self.server,
            generator=GeneratorModel(gen.capacity, gen.c_o, gen.c_m, gen.beta_g, count),
            cooling=self.cooling,
            conditioning=self.conditioning,
            label=self.label,
        )


# ---------------------------------------------------------------------------
# operating-point math


def demand_series(instance: Instance, x) -> np.ndarray:
    """Vector of d_t(x(t)) across the horizon for a fleet series x.

    Vectorized over slots (cooling evaluated per regime group); no
    feasibility gate, callers decide whether x must cover the workload.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != instance.workload.shape:
        raise ConfigError(f"fleet series has shape {x.shape}, expected {instance.workload.shape}")
    srv = instance.server
    b = srv.c_idle * x + (srv.c_peak - srv.c_idle) * instance.workload
    out = b + np.asarray(instance.conditioning.power(b), dtype=float)
    cool = instance.cooling
    if cool.kind != "none":
        hours = np.arange(instance.horizon) % cool.period
        bh = b / cool.b_max
        for reg in cool.regimes:
            if reg.start == reg.end:
                mask = np.ones_like(hours, dtype=bool)
            elif reg.start < reg.end:
                mask = (hours >= reg.start) & (hours < reg.end)
            else:
                mask = (hours >= reg.start) | (hours < reg.end)
            bm = bh[mask]
            if cool.kind == "quadratic":
                q, l, c = reg.coeffs
                out[mask] += (q * bm * bm + l * bm + c) * cool.b_max
            else:
                out[mask] += reg.coeffs[0] * bm * bm * bm * cool.b_max
    return out


def server_power(server: ServerModel, x: int, a: float) -> float:
    """Aggregate server draw for x powered-on servers serving workload a."""
    if a < 0.0:
        raise FeasibilityError(f"workload must be nonnegative, got {a}")
    if x < math.ceil(a):
        raise FeasibilityError(f"x={x} servers cannot serve workload a={a} (need >= {math.ceil(a)})")
    return server.c_idle * x + (server.c_peak - server.c_idle) * a


def total_power(instance: Instance, t: int, x: int) -> float:
    """Energy demand d_t(x): servers plus conditioning and cooling overheads."""
    if x < instance.min_servers(t):
        raise FeasibilityError(
            f"slot {t}: x={x} below required fleet {instance.min_servers(t)}"
        )
    return float(instance.raw_demand(t, float(x)))


def demand(instance: Instance, t: int, x: int) -> float:
    """Alias of total_power; the name downstream solvers use."""
    return total_power(instance, t, x)


def supply_cost(gen: GeneratorModel, y: int, p: float, d: float) -> float:
    """Cheapest energy cost for demand d with y active generators at price p.

    Maintenance for the y active units is included. Grid-first when the price
    beats incremental generation cost, otherwise generators up to capacity
    with the grid taking the remainder.
    """
    if y < 0 or y > gen.count:
        raise FeasibilityError(f"y={y} outside generator fleet [0, {gen.count}]")
    if d < -FEAS_TOL:
        raise FeasibilityError(f"demand must be nonnegative, got {d}")
    d = max(d, 0.0)
    cap = gen.capacity * y
    if p <= gen.c_o:
        return gen.c_m * y + p * d
    if d > cap:
        return gen.c_m * y + gen.c_o * cap + p * (d - cap)
    return gen.c_m * y + gen.c_o * d


def dispatch(gen: GeneratorModel, y: int, p: float, d: float) -> tuple[float, float]:
    """Split demand d into (on-site u, grid v) attaining supply_cost."""
    if y < 0 or y > gen.count:
        raise FeasibilityError(f"y={y} outside generator fleet [0, {gen.count}]")
    if d < -FEAS_TOL:
        raise FeasibilityError(f"demand must be nonnegative, got {d}")
    d = max(d, 0.0)
    u = 0.0 if p <= gen.c_o else min(gen.capacity * y, d)
    return u, d - u


# ---------------------------------------------------------------------------
# schedules and cost accounting


@dataclass(frozen=True)
class Schedule:
    """A complete decision sequence: fleets x, y and dispatch u, v per slot."""

    x: np.ndarray
    y: np.ndarray
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", _frozen_array(self.x))
        object.__setattr__(self, "y", _frozen_array(self.y))
        object.__setattr__(self, "u", _frozen_array(self.u))
        object.__setattr__(self, "v", _frozen_array(self.v))
        lengths = {len(self.x), len(self.y), len(self.u), len(self.v)}
        if len(lengths) != 1:
            raise ConfigError(f"schedule series lengths differ: {sorted(lengths)}")

    @property
    def horizon(self) -> int:
        return len(self.x)


def dispatched_schedule(instance: Instance, x, y) -> Schedule:
    """Complete integer decisions (x, y) with the cost-optimal dispatch."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    u = np.empty(instance.horizon)
    v = np.empty(instance.horizon)
    for t in range(1, instance.horizon + 1):
        d = total_power(instance, t, int(round(x[t - 1])))
        u[t - 1], v[t - 1] = dispatch(instance.generator, int(round(y[t - 1])), instance.p(t), d)
    return Schedule(x=x, y=y, u=u, v=v)


@dataclass(frozen=True)
class CostBreakdown:
    """Total cost split into its five components."""

    grid_energy: float
    onsite_energy: float
    maintenance: float
    server_switching: float
    generator_startup: float

    @property
    def total(self) -> float:
        return (
            self.grid_energy
            + self.onsite_energy
            + self.maintenance
            + self.server_switching
            + self.generator_startup
        )

    def as_dict(self) -> dict[str, float]:
        return {
            "grid_energy": self.grid_energy,
            "onsite_energy": self.onsite_energy,
            "maintenance": self.maintenance,
            "server_switching": self.server_switching,
            "generator_startup": self.generator_startup,
            "total": self.total,
        }


def check_schedule(instance: Instance, sched: Schedule) -> None:
    """Raise FeasibilityError naming the first violated constraint and slot."""
    if sched.horizon != instance.horizon:
        raise FeasibilityError(
            f"schedule horizon {sched.horizon} != instance horizon {instance.horizon}"
        )
    gen = instance.generator
    for t in range(1, instance.horizon + 1):
        k = t - 1
        x, y, u, v = sched.x[k], sched.y[k], sched.u[k], sched.v[k]
        if x != int(x) or x < instance.min_servers(t):
            raise FeasibilityError(
                f"slot {t}: x={x} must be an integer >= ceil(a)={instance.min_servers(t)}"
            )
        if y != int(y) or not 0 <= y <= gen.count:
            raise FeasibilityError(f"slot {t}: y={y} must be an integer in [0, {gen.count}]")
        if u < -FEAS_TOL or v < -FEAS_TOL:
            raise FeasibilityError(f"slot {t}: negative dispatch u={u}, v={v}")
        if u > gen.capacity * y + FEAS_TOL:
            raise FeasibilityError(
                f"slot {t}: on-site supply u={u} exceeds active capacity {gen.capacity * y}"
            )
        d = instance.raw_demand(t, float(x))
        if u + v < d - FEAS_TOL:
            raise FeasibilityError(f"slot {t}: supply u+v={u + v} below demand {d}")


def evaluate(instance: Instance, sched: Schedule) -> CostBreakdown:
    """Exact cost of a feasible schedule; boundary state is all-off."""
    check_schedule(instance, sched)
    grid = float(np.dot(sched.v, instance.price))
    onsite = float(instance.generator.c_o * sched.u.sum())
    maintenance = float(instance.generator.c_m * sched.y.sum())
    dx = np.diff(np.concatenate(([0.0], sched.x)))
    dy = np.diff(np.concatenate(([0.0], sched.y)))
    switching = float(instance.server.beta_s * dx.clip(min=0.0).sum())
    startup = float(instance.generator.beta_g * dy.clip(min=0.0).sum())
    return CostBreakdown(
        grid_energy=grid,
        onsite_energy=onsite,
        maintenance=maintenance,
        server_switching=switching,
        generator_startup=startup,
    )
