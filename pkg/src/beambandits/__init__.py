"""Fixed-budget best-beam identification via unimodal bandit elimination.

Public surface: the three policies, environment constructors, bound
evaluators, and the sweep harness.
"""

from .baselines import LineSearchElimination, SequentialHalving
from .bounds import (
    DegenerateGaps,
    GapProfile,
    InvalidProfile,
    LowerBoundFamily,
    build_lower_bound_family,
    extract_gaps,
    lower_bound_value,
    ub3_error_upper_bound,
)
from .channel import (
    ChannelInstance,
    ChannelParams,
    NotUnimodal,
    bernoulli_instance,
    build_los_instance,
    build_unimodal_los_instance,
    codebook_angles,
    dft_codebook,
    directivity,
    exact_instance,
    gaussian_instance,
    is_unimodal,
    load_instance,
    path_loss_db,
    save_instance,
)
from .core import (
    BanditError,
    BudgetTooSmall,
    Environment,
    KTooSmall,
    Policy,
    PolicyRun,
    WindowTooSmall,
    run_policy,
    seeded_stream,
)
from .harness import (
    Cell,
    ConfigError,
    ExperimentConfig,
    IOWriteFailed,
    POLICIES,
    TrialBatch,
    load_config,
    parse_config,
    run_sweep,
    throughput,
    write_results,
)
from .ub3 import (
    UB3,
    ArmWindow,
    PhaseSchedule,
    Quadruple,
    build_schedule,
    eliminate,
    phase_count,
    phase_count_real,
    phase_shares,
    select_quadruple,
)

__all__ = [
    "ArmWindow",
    "BanditError",
    "BudgetTooSmall",
    "Cell",
    "ChannelInstance",
    "ChannelParams",
    "ConfigError",
    "DegenerateGaps",
    "Environment",
    "ExperimentConfig",
    "GapProfile",
    "IOWriteFailed",
    "InvalidProfile",
    "KTooSmall",
    "LineSearchElimination",
    "LowerBoundFamily",
    "NotUnimodal",
    "POLICIES",
    "PhaseSchedule",
    "Policy",
    "PolicyRun",
    "Quadruple",
    "SequentialHalving",
    "TrialBatch",
    "UB3",
    "WindowTooSmall",
    "bernoulli_instance",
    "build_los_instance",
    "build_lower_bound_family",
    "build_schedule",
    "build_unimodal_los_instance",
    "codebook_angles",
    "dft_codebook",
    "directivity",
    "eliminate",
    "exact_instance",
    "extract_gaps",
    "gaussian_instance",
    "is_unimodal",
    "load_config",
    "load_instance",
    "lower_bound_value",
    "parse_config",
    "path_loss_db",
    "phase_count",
    "phase_count_real",
    "phase_shares",
    "run_policy",
    "run_sweep",
    "save_instance",
    "seeded_stream",
    "select_quadruple",
    "throughput",
    "ub3_error_upper_bound",
    "write_results",
]

__version__ = "0.1.0"
