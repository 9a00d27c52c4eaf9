"""Joint server-capacity and energy-supply scheduling for data centers.

Offline exact solvers, per-unit decompositions, look-ahead online
algorithms with competitive-ratio bounds, an experiment layer, and a
trace-driven harness with a CLI.
"""

from .errors import (
    CapacityError,
    ConfigError,
    DcmError,
    FeasibilityError,
    LookaheadViolation,
    VerificationError,
)
from .model import (
    ConditioningModel,
    CoolingModel,
    CoolingRegime,
    CostBreakdown,
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
from .offline import (
    brute_force_cp,
    brute_force_dcm,
    brute_force_ep,
    cp_cost,
    cp_offline_slices,
    critical_segments,
    ep_cost,
    ep_offline_slices,
    ofa_ep_slice,
    regret_process,
    solve_cp_offline,
    solve_dcm_offline,
    solve_ep_offline,
)
from .online import (
    BoundParams,
    LookaheadStream,
    chase,
    dcmon,
    ep_lookahead,
    gcsr,
    ratio_bound_ep,
    ratio_bound_hybrid,
    ratio_bound_hybrid_loose,
    ratio_bound_ongrid,
    rho_decomposition,
)
from .analysis import (
    ExperimentReport,
    ablation_cp_only,
    ablation_ep_only,
    decomposition_tightness,
    run_comparison,
    static_benchmark,
    sweep_generators,
    sweep_lookahead,
    worst_case_gcsr_instance,
    worst_case_rho_instance,
)
from .harness import (
    PRESETS,
    TraceFile,
    build_instance,
    load_config,
    load_trace,
    synthesize_trace,
)
from .verify import run_verification

__version__ = "0.1.0"

__all__ = [
    "BoundParams",
    "CapacityError",
    "ConditioningModel",
    "ConfigError",
    "CoolingModel",
    "CoolingRegime",
    "CostBreakdown",
    "DcmError",
    "ExperimentReport",
    "FeasibilityError",
    "GeneratorModel",
    "Instance",
    "LookaheadStream",
    "LookaheadViolation",
    "PRESETS",
    "Schedule",
    "ServerModel",
    "TraceFile",
    "VerificationError",
    "ablation_cp_only",
    "ablation_ep_only",
    "brute_force_cp",
    "brute_force_dcm",
    "brute_force_ep",
    "build_instance",
    "chase",
    "check_schedule",
    "cp_cost",
    "cp_offline_slices",
    "critical_segments",
    "dcmon",
    "decomposition_tightness",
    "demand_series",
    "dispatch",
    "dispatched_schedule",
    "ep_cost",
    "ep_lookahead",
    "ep_offline_slices",
    "evaluate",
    "gcsr",
    "load_config",
    "load_trace",
    "ofa_ep_slice",
    "ratio_bound_ep",
    "ratio_bound_hybrid",
    "ratio_bound_hybrid_loose",
    "ratio_bound_ongrid",
    "regret_process",
    "rho_decomposition",
    "run_comparison",
    "run_verification",
    "server_power",
    "solve_cp_offline",
    "solve_dcm_offline",
    "solve_ep_offline",
    "static_benchmark",
    "supply_cost",
    "sweep_generators",
    "sweep_lookahead",
    "synthesize_trace",
    "total_power",
    "worst_case_gcsr_instance",
    "worst_case_rho_instance",
]
