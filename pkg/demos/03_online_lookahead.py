"""Look-ahead online algorithms and their worst-case guarantees.

Shows how a w-slot preview changes provisioning decisions, how generator
commitment chases its offline certificate, how the combined pipeline
stacks the two, and how measured ratios sit against the closed-form
bounds on the adversarial family.

Run with: python3 demos/03_online_lookahead.py
"""

import numpy as np

from dcmkit import (
    BoundParams,
    GeneratorModel,
    Instance,
    ServerModel,
    chase,
    dcmon,
    evaluate,
    gcsr,
    ratio_bound_hybrid,
    ratio_bound_ongrid,
    solve_cp_offline,
    solve_ep_offline,
)
from dcmkit.analysis import gcsr_family_measurement, grid_only_schedule
from dcmkit.offline import cp_cost


def main() -> None:
    # -- provisioning with a preview ----------------------------------------
    # Dyadic toy: idle slot costs exactly 0.03125, so a restart breaks even
    # after beta_s / 0.03125 = 4 idle slots. The workload has one 5-slot
    # gap, one slot longer than break-even, so offline turns off at once.
    print("=== provisioning: hold until the preview proves the gap ===")
    inst = Instance(
        workload=np.array([1, 0, 0, 0, 0, 0, 1], dtype=float),
        price=np.full(7, 0.125),
        server=ServerModel(c_idle=0.25, c_peak=0.25, beta_s=0.125),
        generator=GeneratorModel(capacity=60.0, c_o=0.08, c_m=1.2, beta_g=24.0, count=0),
        label="gap-toy",
    )
    offline = solve_cp_offline(inst)
    print(f"a = {inst.workload.astype(int).tolist()}   (gap of 5 > break-even 4)")
    print(f"offline     x = {offline.astype(int).tolist()}")
    for w in (0, 2, 4):
        x = gcsr(inst, w)
        cost = cp_cost(inst, x)
        tag = "  <- matches offline" if np.array_equal(x, offline) else ""
        print(f"lookahead {w}: x = {x.astype(int).tolist()}  cost {cost:.5f}{tag}")
    print("blind (w=0) the algorithm holds until sunk idle cost equals the")
    print("restart fee; each slot of preview converts holding into foresight,")
    print("and at w = 4 the preview spans the whole break-even window")
    print()

    # -- supply commitment chases the regret walk ---------------------------
    # Same dyadic generator series as the offline demo, first spell only.
    # The walk needs 16 busy slots to climb from -beta_g to 0; with no
    # preview the commitment lands 16 slots late, and each slot of preview
    # claws one back.
    print("=== supply: commitment lag shrinks with preview ===")
    gen = GeneratorModel(capacity=64.0, c_o=0.0625, c_m=1.25, beta_g=24.0, count=1)
    energy = np.concatenate([np.zeros(4), np.full(28, 96.0), np.zeros(4)])
    price = np.full(len(energy), 0.10546875)
    y_off = solve_ep_offline(gen, energy, price)
    first_on = int(np.flatnonzero(y_off > 0)[0]) + 1

    def first_commit(y: np.ndarray) -> int | None:
        on = np.flatnonzero(y > 0)
        return int(on[0]) + 1 if len(on) else None

    print(f"busy spell starts at slot 5; offline commits at slot {first_on}")
    for w in (0, 8, 16):
        y = chase(gen, energy, price, w)
        print(f"lookahead {w:2d}: first commitment at slot {first_commit(y)}")
    print()

    # -- the combined pipeline ----------------------------------------------
    # Provisioning runs ahead of supply by the slack the break-even window
    # leaves, so the supply stage sees resolved demand instead of guesses.
    print("=== combined pipeline on a price-spiked trace ===")
    rng = np.random.default_rng(3)
    t_end = 96
    workload = 300.0 + 200.0 * rng.random(t_end)
    price = np.where(np.arange(t_end) % 24 < 6, 0.3, 0.09)
    inst = Instance(
        workload=workload,
        price=price,
        server=ServerModel(c_idle=0.1, c_peak=0.25, beta_s=0.08),
        generator=GeneratorModel(capacity=60.0, c_o=0.08, c_m=1.2, beta_g=24.0, count=2),
        label="spiked",
    )
    for w in (0, 4, 12):
        sched = dcmon(inst, w)
        grid_only = evaluate(inst, grid_only_schedule(inst, gcsr(inst, w))).total
        combo = evaluate(inst, sched).total
        gens = int(sched.y.max())
        print(f"lookahead {w:2d}: grid-only {grid_only:8.3f}   with generators "
              f"{combo:8.3f}   (peak {gens} committed)")
    print()

    # -- measured ratios vs closed-form bounds ------------------------------
    print("=== guarantees: bound curve and adversarial family ===")
    params = BoundParams(
        beta_s=0.08, beta_g=24.0, c_o=0.08, c_m=1.2, capacity=60.0,
        p_min=0.1, p_max=0.2, d_min=0.1,
    )
    ws = [0, 2, 4, 6, 8]
    print("bound on online/offline cost as look-ahead grows:")
    print("  w        : " + "  ".join(f"{w:6d}" for w in ws))
    print("  grid-only: " + "  ".join(f"{ratio_bound_ongrid(w, params):6.3f}" for w in ws))
    print("  hybrid   : " + "  ".join(f"{ratio_bound_hybrid(w, params):6.3f}" for w in ws))
    print()
    print("adversarial provisioning family (idle gaps exactly at break-even):")
    for w in (0, 4, 8):
        m = gcsr_family_measurement(w, periods=50, gap=8, idle_ratio=8.0)
        print(f"  lookahead {w}: measured ratio {m['ratio']:.4f}  vs bound "
              f"{m['bound']:.4f}  ({100 * m['fraction']:.1f}% of bound)")
    print("no preview pins the algorithm near the factor-2 bound; a preview")
    print("covering the break-even window recovers the offline schedule exactly")


if __name__ == "__main__":
    main()
