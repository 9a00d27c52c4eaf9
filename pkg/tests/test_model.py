"""Device models, demand evaluation, dispatch, and cost accounting."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dcmkit import (
    ConditioningModel,
    ConfigError,
    CoolingModel,
    CoolingRegime,
    FeasibilityError,
    GeneratorModel,
    Instance,
    Schedule,
    ServerModel,
    check_schedule,
    demand_series,
    dispatch,
    dispatched_schedule,
    evaluate,
    server_power,
    supply_cost,
    total_power,
)
from dcmkit.verify import random_tiny_instance

GEN = GeneratorModel(capacity=60.0, c_o=0.08, c_m=1.2, beta_g=24.0, count=2)


def bare_instance(workload, price, beta_s=0.08, count=0, **kw):
    """Linear-server instance with no overheads and an idle generator fleet."""
    return Instance(
        workload=workload,
        price=price,
        server=ServerModel(c_idle=0.1, c_peak=0.25, beta_s=beta_s),
        generator=GeneratorModel(60.0, 0.08, 1.2, 24.0, count),
        **kw,
    )


def ny_overhead_instance(n_slots=9, servers=2500):
    b_max = 0.25 * servers
    cooling = CoolingModel(
        kind="quadratic",
        regimes=(
            CoolingRegime("day", 8, 20, (0.041, 0.144, 0.047)),
            CoolingRegime("night", 20, 8, (0.03, 0.136, 0.042)),
        ),
        b_max=b_max,
    )
    conditioning = ConditioningModel(
        kind="quadratic", quad=0.012, lin=0.046, const=0.056, b_max=b_max
    )
    return Instance(
        workload=np.zeros(n_slots),
        price=np.full(n_slots, 0.1),
        server=ServerModel(c_idle=0.125, c_peak=0.25, beta_s=0.08),
        generator=GeneratorModel(60.0, 0.08, 1.2, 24.0, 0),
        cooling=cooling,
        conditioning=conditioning,
    )


# ---------------------------------------------------------------------------
# server power and total demand


def test_server_power_linear_model():
    srv = ServerModel(c_idle=0.1, c_peak=0.25, beta_s=0.08)
    assert server_power(srv, 10, 4.0) == pytest.approx(1.6, abs=1e-12)
    assert server_power(srv, 0, 0.0) == 0.0
    # all-idle fleet draws c_idle per server
    assert server_power(srv, 4, 0.0) == pytest.approx(0.4, abs=1e-12)


def test_server_power_rejects_undersized_fleet():
    srv = ServerModel(c_idle=0.1, c_peak=0.25, beta_s=0.08)
    with pytest.raises(FeasibilityError):
        server_power(srv, 3, 3.5)
    with pytest.raises(FeasibilityError):
        server_power(srv, 1, -0.1)


def test_total_power_without_overheads_is_server_power():
    inst = bare_instance([4.0], [0.1])
    assert total_power(inst, 1, 10) == pytest.approx(1.6, abs=1e-12)


def test_total_power_with_overheads_day_regime():
    # b = 312.5 at b_max = 625, so b_hat = 0.5; slot 9 is hour 8 (daytime).
    # cooling (0.041*0.25 + 0.144*0.5 + 0.047)*625 = 80.78125
    # conditioning (0.012*0.25 + 0.046*0.5 + 0.056)*625 = 51.25
    inst = ny_overhead_instance()
    assert total_power(inst, 9, 2500) == pytest.approx(444.53125, abs=1e-9)


def test_total_power_with_overheads_night_regime():
    # same operating point in slot 1 (hour 0) picks the night coefficients
    inst = ny_overhead_instance()
    assert total_power(inst, 1, 2500) == pytest.approx(437.1875, abs=1e-9)


def test_total_power_rejects_undersized_fleet():
    inst = bare_instance([4.0], [0.1])
    with pytest.raises(FeasibilityError):
        total_power(inst, 1, 3)


def test_demand_series_matches_per_slot_tables():
    rng = np.random.default_rng(3)
    for _ in range(25):
        inst = random_tiny_instance(rng)
        x = np.array([rng.integers(inst.min_servers(t), inst.max_servers + 1)
                      for t in range(1, inst.horizon + 1)], dtype=float)
        series = demand_series(inst, x)
        for t in range(1, inst.horizon + 1):
            assert series[t - 1] == pytest.approx(
                inst.demand_table(t)[int(x[t - 1])], abs=1e-12)


def test_marginal_demand_nondecreasing_in_unit_index():
    # convex overheads make each additional server at least as expensive
    rng = np.random.default_rng(4)
    for _ in range(50):
        inst = random_tiny_instance(rng)
        for t in range(1, inst.horizon + 1):
            incs = [inst.marginal_demand(t, i) for i in range(1, inst.max_servers + 2)]
            assert all(b >= a - 1e-12 for a, b in zip(incs, incs[1:]))


def test_min_marginal_demand_is_a_lower_bound():
    rng = np.random.default_rng(5)
    for _ in range(50):
        inst = random_tiny_instance(rng)
        floor = inst.min_marginal_demand()
        for t in range(1, inst.horizon + 1):
            for i in range(1, inst.max_servers + 2):
                assert inst.marginal_demand(t, i) >= floor - 1e-12


def test_breakeven_idle_window_infinite_when_idling_is_free():
    inst = Instance(
        workload=[1.0],
        price=[0.1],
        server=ServerModel(c_idle=0.0, c_peak=0.25, beta_s=0.08),
        generator=GeneratorModel(60.0, 0.08, 1.2, 24.0, 0),
    )
    assert math.isinf(inst.breakeven_idle_window())


def test_breakeven_idle_window_plain_ratio():
    inst = bare_instance([1.0, 0.0], [0.1, 0.2])
    # beta_s / (c_idle * p_min) = 0.08 / 0.01
    assert inst.breakeven_idle_window() == pytest.approx(8.0)


# ---------------------------------------------------------------------------
# supply cost and dispatch


def test_supply_cost_three_regimes():
    assert supply_cost(GEN, 0, 0.10, 50.0) == pytest.approx(5.0, abs=1e-12)
    assert supply_cost(GEN, 1, 0.05, 50.0) == pytest.approx(3.7, abs=1e-12)
    assert supply_cost(GEN, 1, 0.10, 50.0) == pytest.approx(5.2, abs=1e-12)


def test_supply_cost_overflow_to_grid():
    # y=1 caps on-site at 60; remaining 40 buys at grid price
    got = supply_cost(GEN, 1, 0.10, 100.0)
    assert got == pytest.approx(1.2 + 0.08 * 60 + 0.10 * 40, abs=1e-12)


def test_dispatch_worked_splits():
    assert dispatch(GEN, 1, 0.05, 50.0) == (0.0, 50.0)
    assert dispatch(GEN, 1, 0.10, 50.0) == (50.0, 0.0)
    assert dispatch(GEN, 1, 0.10, 100.0) == (60.0, 40.0)


def test_dispatch_validates_fleet_and_demand():
    with pytest.raises(FeasibilityError):
        dispatch(GEN, 3, 0.1, 10.0)
    with pytest.raises(FeasibilityError):
        dispatch(GEN, -1, 0.1, 10.0)
    with pytest.raises(FeasibilityError):
        supply_cost(GEN, 1, 0.1, -5.0)


@given(
    cap=st.floats(0.5, 120.0),
    co=st.floats(0.0, 0.3),
    cm=st.floats(0.0, 5.0),
    y=st.integers(0, 4),
    p=st.floats(0.0, 0.5),
    d=st.floats(0.0, 500.0),
)
@settings(max_examples=200, deadline=None)
def test_dispatch_attains_supply_cost(cap, co, cm, y, p, d):
    gen = GeneratorModel(cap, co, cm, 1.0, 4)
    u, v = dispatch(gen, y, p, d)
    assert -1e-12 <= u <= cap * y + 1e-9
    assert v >= -1e-12
    assert u + v == pytest.approx(d, abs=1e-9)
    realized = gen.c_m * y + gen.c_o * u + p * v
    assert realized == pytest.approx(supply_cost(gen, y, p, d), abs=1e-9)


@given(
    co=st.floats(0.0, 0.3),
    cm=st.floats(0.0, 5.0),
    y=st.integers(0, 3),
    p=st.floats(0.0, 0.5),
    d=st.floats(0.0, 300.0),
    frac=st.floats(0.0, 1.0),
)
@settings(max_examples=200, deadline=None)
def test_no_feasible_split_beats_supply_cost(co, cm, y, p, d, frac):
    gen = GeneratorModel(60.0, co, cm, 1.0, 3)
    u_alt = frac * min(gen.capacity * y, d)
    alt = gen.c_m * y + gen.c_o * u_alt + p * (d - u_alt)
    assert alt >= supply_cost(gen, y, p, d) - 1e-9


# ---------------------------------------------------------------------------
# schedules, feasibility, cost accounting


def test_evaluate_single_slot_worked_example():
    inst = bare_instance([1.0], [0.1])
    sched = dispatched_schedule(inst, [1.0], [0.0])
    costs = evaluate(inst, sched)
    assert costs.grid_energy == pytest.approx(0.025, abs=1e-12)
    assert costs.server_switching == pytest.approx(0.08, abs=1e-12)
    assert costs.onsite_energy == 0.0
    assert costs.maintenance == 0.0
    assert costs.generator_startup == 0.0
    assert costs.total == pytest.approx(0.105, abs=1e-12)


def test_evaluate_counts_only_positive_state_increases():
    inst = bare_instance([1.0, 0.0, 1.0], [0.11, 0.11, 0.11], count=1)
    sched = dispatched_schedule(inst, [1.0, 0.0, 1.0], [1.0, 0.0, 1.0])
    costs = evaluate(inst, sched)
    # two server starts and two generator starts; shutdowns are free
    assert costs.server_switching == pytest.approx(2 * 0.08, abs=1e-12)
    assert costs.generator_startup == pytest.approx(2 * 24.0, abs=1e-12)


def test_breakdown_components_sum_to_total():
    rng = np.random.default_rng(6)
    for _ in range(25):
        inst = random_tiny_instance(rng)
        x = [float(inst.min_servers(t)) for t in range(1, inst.horizon + 1)]
        y = [float(rng.integers(0, inst.generator.count + 1)) for _ in x]
        costs = evaluate(inst, dispatched_schedule(inst, x, y))
        parts = costs.as_dict()
        total = sum(v for k, v in parts.items() if k != "total")
        assert parts["total"] == pytest.approx(total, abs=1e-9)
        assert costs.total == parts["total"]


def test_zero_workload_all_off_costs_nothing():
    inst = bare_instance(np.zeros(5), np.full(5, 0.2))
    z = np.zeros(5)
    costs = evaluate(inst, Schedule(x=z, y=z, u=z, v=z))
    assert costs.total == 0.0


def test_check_schedule_names_first_bad_slot():
    inst = bare_instance([1.0, 2.0], [0.11, 0.11], count=1)
    z = np.zeros(2)
    with pytest.raises(FeasibilityError, match="slot 2"):
        check_schedule(inst, Schedule(x=[1.0, 1.0], y=z, u=z, v=[0.25, 0.25]))
    with pytest.raises(FeasibilityError, match="slot 1"):
        check_schedule(inst, Schedule(x=[1.5, 2.0], y=z, u=z, v=[9.0, 9.0]))
    # on-site supply above active capacity
    with pytest.raises(FeasibilityError, match="capacity"):
        check_schedule(
            inst, Schedule(x=[1.0, 2.0], y=[0.0, 0.0], u=[0.3, 0.0], v=[0.0, 9.0])
        )
    # supply short of demand
    with pytest.raises(FeasibilityError, match="below demand"):
        check_schedule(inst, Schedule(x=[1.0, 2.0], y=z, u=z, v=[0.1, 9.0]))


def test_schedule_padding_with_idle_tail_is_free():
    inst = bare_instance([1.0, 1.0], [0.1, 0.2])
    padded = bare_instance([1.0, 1.0, 0.0, 0.0], [0.1, 0.2, 0.3, 0.3])
    c2 = evaluate(inst, dispatched_schedule(inst, [1.0, 1.0], [0.0, 0.0]))
    c4 = evaluate(padded, dispatched_schedule(padded, [1.0, 1.0, 0.0, 0.0], np.zeros(4)))
    assert c4.total == pytest.approx(c2.total, abs=1e-12)


# ---------------------------------------------------------------------------
# construction-time validation


def test_model_parameter_validation():
    with pytest.raises(ConfigError):
        ServerModel(c_idle=0.3, c_peak=0.25, beta_s=0.08)
    with pytest.raises(ConfigError):
        ServerModel(c_idle=0.1, c_peak=0.25, beta_s=0.0)
    with pytest.raises(ConfigError):
        GeneratorModel(0.0, 0.08, 1.2, 24.0, 1)
    with pytest.raises(ConfigError):
        GeneratorModel(60.0, 0.08, 1.2, 24.0, -1)
    with pytest.raises(ConfigError):
        CoolingModel(kind="mystery")
    with pytest.raises(ConfigError):
        ConditioningModel(kind="quadratic", quad=-0.1, b_max=1.0)


def test_cooling_regimes_must_tile_the_period():
    day = CoolingRegime("day", 8, 20, (0.1, 0.1, 0.1))
    with pytest.raises(ConfigError, match="hour"):
        CoolingModel(kind="quadratic", regimes=(day,), b_max=1.0)
    overlap = CoolingRegime("extra", 19, 21, (0.1, 0.1, 0.1))
    night = CoolingRegime("night", 20, 8, (0.1, 0.1, 0.1))
    with pytest.raises(ConfigError, match="hour"):
        CoolingModel(kind="quadratic", regimes=(day, night, overlap), b_max=1.0)


def test_instance_series_validation():
    with pytest.raises(ConfigError, match="mismatch"):
        bare_instance([1.0, 2.0], [0.1])
    with pytest.raises(ConfigError, match="nonnegative"):
        bare_instance([-1.0], [0.1])
    with pytest.raises(ConfigError, match="nonnegative"):
        bare_instance([1.0], [-0.1])
    with pytest.raises(ConfigError, match="at least one"):
        bare_instance([], [])


def test_instance_rejects_uneconomical_fleet():
    # break-even 0.08 + 1.2/60 = 0.1 is not strictly below the price peak
    with pytest.raises(ConfigError, match="uneconomical"):
        bare_instance([1.0], [0.1], count=1)
    bare_instance([1.0], [0.1], count=0)  # idle fleet is fine
    bare_instance([1.0], [0.11], count=1)


def test_truncated_prefix_views():
    inst = bare_instance([1.0, 2.0, 0.5], [0.05, 0.2, 0.1], count=1)
    cut = inst.truncated(1)
    assert cut.horizon == 1
    assert cut.a(1) == 1.0 and cut.p(1) == 0.05
    # prefix price peak (0.05) sits below generator break-even (0.1), yet
    # the view stays usable because validation is inherited from the parent
    assert cut.generator.count == 1
    with pytest.raises(ValueError):
        inst.truncated(0)
    with pytest.raises(ValueError):
        inst.truncated(4)


def test_with_generator_count_swaps_only_the_fleet():
    inst = bare_instance([1.0], [0.2], count=2)
    alt = inst.with_generator_count(0)
    assert alt.generator.count == 0
    assert alt.generator.capacity == inst.generator.capacity
    assert alt.server is inst.server


def test_instance_arrays_are_frozen():
    inst = bare_instance([1.0, 2.0], [0.1, 0.2])
    with pytest.raises(ValueError):
        inst.workload[0] = 5.0
    with pytest.raises(ValueError):
        inst.price[0] = 5.0
    table = inst.demand_table(1)
    with pytest.raises(ValueError):
        table[0] = 5.0
