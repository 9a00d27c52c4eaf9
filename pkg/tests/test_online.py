"""Look-ahead online algorithms and their competitive-ratio bounds."""

import math

import numpy as np
import pytest

from dcmkit import (
    BoundParams,
    ConfigError,
    GeneratorModel,
    Instance,
    LookaheadStream,
    LookaheadViolation,
    ServerModel,
    chase,
    dcmon,
    demand_series,
    ep_lookahead,
    evaluate,
    gcsr,
    ratio_bound_ep,
    ratio_bound_hybrid,
    ratio_bound_hybrid_loose,
    ratio_bound_ongrid,
    rho_decomposition,
    solve_cp_offline,
)
from dcmkit.analysis import grid_only_schedule
from dcmkit.online import ongrid_bound_from_instance
from dcmkit.verify import random_tiny_instance

# dyadic idle economics: every server unit draws exactly 0.25, price 0.125,
# so one idle slot costs 0.03125 and the break-even window is 4 slots sharp
IDLE = 0.03125
BETA_S = 0.125


def dyadic_instance(workload):
    return Instance(
        workload=workload,
        price=np.full(len(workload), 0.125),
        server=ServerModel(c_idle=0.25, c_peak=0.25, beta_s=BETA_S),
        generator=GeneratorModel(60.0, 0.08, 1.2, 24.0, 0),
    )


# ---------------------------------------------------------------------------
# revealed-window plumbing


def test_stream_reveals_exactly_the_window():
    inst = dyadic_instance([1, 0, 0, 1, 0])
    stream = LookaheadStream(inst, 2)
    assert stream.revealed_end == 3
    assert stream.price(3) == 0.125
    with pytest.raises(LookaheadViolation):
        stream.price(4)
    stream.advance()
    assert stream.cursor == 2 and stream.revealed_end == 4
    stream.workload(4)
    with pytest.raises(LookaheadViolation):
        stream.demand_table(5)
    for _ in range(3):
        stream.advance()
    assert stream.revealed_end == 5  # clipped at the horizon
    with pytest.raises(ConfigError):
        LookaheadStream(inst, -1)


# ---------------------------------------------------------------------------
# GCSR hand traces


def test_gcsr_no_lookahead_waits_out_the_breakeven_window():
    inst = dyadic_instance([1, 0, 0, 0, 0, 0, 1])
    # without look-ahead the slice idles 3 slots and turns off on the 4th,
    # when accumulated idle cost reaches beta_s
    assert np.array_equal(gcsr(inst, 0), [1, 1, 1, 1, 0, 0, 1])


def test_gcsr_full_window_matches_offline():
    inst = dyadic_instance([1, 0, 0, 0, 0, 0, 1])
    # 5-slot gap costs 5 * 0.03125 > beta_s, so offline turns off at the gap
    x = gcsr(inst, 4)
    assert np.array_equal(x, [1, 0, 0, 0, 0, 0, 1])
    assert np.array_equal(x, solve_cp_offline(inst))


def test_gcsr_partial_window_interpolates():
    inst = dyadic_instance([1, 0, 0, 0, 0, 0, 1])
    # w=2: the break-even point becomes visible two slots into the gap
    assert np.array_equal(gcsr(inst, 2), [1, 1, 0, 0, 0, 0, 1])


def test_gcsr_holds_through_cheap_gap():
    inst = dyadic_instance([1, 0, 0, 0, 1])
    # 3-slot gap costs 0.09375 < beta_s: stay on at any window
    for w in (0, 2, 4, 8):
        assert np.array_equal(gcsr(inst, w), [1, 1, 1, 1, 1])


def test_gcsr_breakeven_tie_turns_off():
    inst = dyadic_instance([1, 0, 0, 0, 0, 1])
    # 4-slot gap costs exactly beta_s; offline prefers off and GCSR agrees
    assert np.array_equal(gcsr(inst, 4), solve_cp_offline(inst))
    assert np.array_equal(gcsr(inst, 4), [1, 0, 0, 0, 0, 1])


def test_gcsr_slices_sum_and_nest():
    rng = np.random.default_rng(20)
    for _ in range(25):
        inst = random_tiny_instance(rng)
        w = int(rng.integers(0, 5))
        x, slices = gcsr(inst, w, return_slices=True)
        assert np.array_equal(slices.sum(axis=0), x)
        for hi, lo in zip(slices, slices[1:]):
            assert np.all(hi >= lo)


def test_gcsr_never_turns_off_while_busy_is_visible():
    inst = dyadic_instance([2, 0, 2])
    assert np.array_equal(gcsr(inst, 0), [2, 2, 2])
    assert np.array_equal(gcsr(inst, 4), [2, 2, 2])


# ---------------------------------------------------------------------------
# CHASE hand traces

# dyadic generator economics: gain per loaded slot at price 27/256 is
# 64 * (27/256 - 1/16) - 5/4 = 1.5 exactly, so -beta_g is erased in 16 slots
CH_GEN = GeneratorModel(capacity=64.0, c_o=0.0625, c_m=1.25, beta_g=24.0, count=1)
CH_PRICE = 0.10546875


def test_chase_no_lookahead_switches_at_the_extreme():
    t_end = 20
    y = chase(CH_GEN, np.full(t_end, 64.0), np.full(t_end, CH_PRICE), 0)
    assert np.array_equal(y, [0] * 15 + [1] * 5)


def test_chase_lookahead_switches_when_the_extreme_enters_the_window():
    t_end = 20
    y = chase(CH_GEN, np.full(t_end, 64.0), np.full(t_end, CH_PRICE), 8)
    assert np.array_equal(y, [0] * 7 + [1] * 13)
    y = chase(CH_GEN, np.full(t_end, 64.0), np.full(t_end, CH_PRICE), 20)
    assert np.array_equal(y, np.ones(t_end))


def test_chase_turns_off_after_the_bottom_traversal():
    energy = np.concatenate([np.full(16, 64.0), np.zeros(24)])
    price = np.full(40, CH_PRICE)
    # idle drain is -c_m = -1.25 per slot; 0 down to -24 needs 20 slots
    y = chase(CH_GEN, energy, price, 0)
    assert np.array_equal(y, [0] * 15 + [1] * 20 + [0] * 5)


def test_chase_stays_off_when_generation_never_pays():
    y = chase(CH_GEN, np.full(10, 64.0), np.full(10, 0.05), 3)
    assert np.array_equal(y, np.zeros(10))


# ---------------------------------------------------------------------------
# combined pipeline


def test_dcmon_provisioning_matches_standalone_gcsr():
    rng = np.random.default_rng(21)
    for _ in range(30):
        inst = random_tiny_instance(rng)
        for w in (0, 1, 3, 6):
            sched = dcmon(inst, w)
            assert np.array_equal(sched.x, gcsr(inst, w))


def test_dcmon_without_generators_is_grid_only_gcsr():
    rng = np.random.default_rng(22)
    for _ in range(10):
        inst = random_tiny_instance(rng).with_generator_count(0)
        sched = dcmon(inst, 2)
        assert np.array_equal(sched.y, np.zeros(inst.horizon))
        ref = grid_only_schedule(inst, gcsr(inst, 2))
        assert evaluate(inst, sched).total == pytest.approx(
            evaluate(inst, ref).total, abs=1e-12)


def test_dcmon_schedule_is_feasible_and_dispatch_optimal():
    rng = np.random.default_rng(23)
    for _ in range(20):
        inst = random_tiny_instance(rng)
        sched = dcmon(inst, 2)
        costs = evaluate(inst, sched)  # evaluate re-checks feasibility
        d = demand_series(inst, sched.x)
        assert np.allclose(sched.u + sched.v, d, atol=1e-9)


def test_dcmon_ep_window_validation():
    inst = dyadic_instance([1, 0, 1])
    with pytest.raises(ConfigError):
        dcmon(inst, 2, ep_window=3)
    with pytest.raises(ConfigError):
        dcmon(inst, 2, ep_window=-1)
    dcmon(inst, 2, ep_window=0)


def test_ep_lookahead_is_the_surplus_over_the_breakeven_window():
    inst = dyadic_instance([1, 0, 1])  # span = 4 slots exactly
    assert ep_lookahead(inst, 0) == 0
    assert ep_lookahead(inst, 4) == 0
    assert ep_lookahead(inst, 5) == 1
    assert ep_lookahead(inst, 10) == 6
    free_idle = Instance(
        workload=[1.0, 0.0],
        price=[0.125, 0.125],
        server=ServerModel(c_idle=0.0, c_peak=0.25, beta_s=0.125),
        generator=GeneratorModel(60.0, 0.08, 1.2, 24.0, 0),
    )
    assert ep_lookahead(free_idle, 100) == 0  # infinite span leaves no surplus


def test_truncated_replay_reproduces_the_online_prefix():
    rng = np.random.default_rng(24)
    inst = random_tiny_instance(rng)
    w = 2
    w_ep = ep_lookahead(inst, w)
    full_x = gcsr(inst, w)
    full = dcmon(inst, w, ep_window=w_ep)
    for cut_at in range(1, inst.horizon + 1):
        cut = inst.truncated(cut_at)
        assert np.array_equal(gcsr(cut, w), full_x[:cut_at])
        replay = dcmon(cut, w, ep_window=w_ep)
        assert np.array_equal(replay.x, full.x[:cut_at])
        assert np.array_equal(replay.y, full.y[:cut_at])


# ---------------------------------------------------------------------------
# closed-form ratio bounds

PARAMS = BoundParams(
    beta_s=0.08,
    beta_g=24.0,
    c_o=0.08,
    c_m=1.2,
    capacity=60.0,
    p_min=0.1,
    p_max=0.2,
    d_min=0.1,
)


def test_ongrid_bound_endpoints():
    assert ratio_bound_ongrid(0, PARAMS) == 2.0
    # break-even window is 0.08 / 0.01 = 8 slots
    assert ratio_bound_ongrid(8, PARAMS) == 1.0
    assert ratio_bound_ongrid(100, PARAMS) == 1.0
    assert ratio_bound_ongrid(4, PARAMS) == pytest.approx(1.5)


def test_ongrid_bound_from_instance_agrees():
    inst = dyadic_instance([1, 0, 1])
    assert ongrid_bound_from_instance(inst, 0) == 2.0
    assert ongrid_bound_from_instance(inst, 2) == pytest.approx(1.5)
    assert ongrid_bound_from_instance(inst, 4) == 1.0


def test_ep_bound_value_and_decay():
    # margin L*P - L*c_o - c_m = 6; at w=0 the bound is 1 + 2*24*6/(24*12) = 2
    assert ratio_bound_ep(0, PARAMS) == pytest.approx(2.0)
    vals = [ratio_bound_ep(w, PARAMS) for w in range(0, 12)]
    assert all(b > n for b, n in zip(vals, vals[1:]))
    assert all(v >= 1.0 for v in vals)


def test_hybrid_bound_values_and_loose_form():
    # rho = L*P / (L*c_o + c_m) = 12 / 6 = 2
    assert rho_decomposition(PARAMS) == pytest.approx(2.0)
    assert ratio_bound_hybrid(0, PARAMS) == pytest.approx(8.0)
    assert ratio_bound_hybrid_loose(0, PARAMS) == pytest.approx(8.8)
    for w in (0, 2, 8, 16, 40):
        assert ratio_bound_hybrid(w, PARAMS) <= ratio_bound_hybrid_loose(w, PARAMS) + 1e-12


def test_bounds_reject_uneconomical_generation():
    with pytest.raises(ConfigError):
        BoundParams(
            beta_s=0.08, beta_g=24.0, c_o=0.08, c_m=1.2,
            capacity=60.0, p_min=0.05, p_max=0.1, d_min=0.1,
        )


def test_bound_params_from_instance():
    inst = Instance(
        workload=[1.0, 0.0],
        price=[0.11, 0.21],
        server=ServerModel(c_idle=0.1, c_peak=0.25, beta_s=0.08),
        generator=GeneratorModel(60.0, 0.08, 1.2, 24.0, 1),
    )
    params = BoundParams.from_instance(inst)
    assert params.p_min == 0.11 and params.p_max == 0.21
    assert params.d_min == pytest.approx(0.1)
    assert params.beta_s == 0.08 and params.beta_g == 24.0
