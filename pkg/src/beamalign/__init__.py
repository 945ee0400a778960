"""Fixed-confidence mmWave beam alignment via heteroscedastic pure-exploration bandits.

The package bundles a narrow-band MISO channel simulator (steering vectors,
codebooks, grouped beams), heteroscedastic Gaussian bandit primitives, the
generalized-likelihood-ratio machinery (stopping statistic, oracle-weight
solver, theoretical bound calculators), the identification algorithms
(two-phase and flat track-and-stop variants plus exhaustive baselines), and
a seeded Monte Carlo harness with CSV reporting.
"""

__version__ = "0.1.0"

from .channel import (
    ArmMeans,
    Channel,
    Codebook,
    PathSpec,
    SteeringConfig,
    arm_means,
    array_response,
    build_codebook,
    group_beam,
    import_channel,
    mean_reward,
    synth_channel,
    write_channel,
)
from .bandit import (
    BanditInstance,
    NoiseConditionReport,
    TrackingState,
    check_noise_condition,
    d_hg,
    record,
    sample_reward,
)
from .glr import (
    GlrConfig,
    WeightSolution,
    c_star_u,
    f_x,
    f_y,
    glr_statistic,
    lower_bound,
    pooled_mean,
    solve_weights,
    t_star_u,
    threshold,
)
from .algorithms import (
    AlgoResult,
    BeamOracle,
    StepCapExceeded,
    TableOracle,
    eba,
    heba,
    htands,
    ts_baseline,
    two_phase_htands,
    two_phase_ts,
)
from .harness import (
    ScenarioConfig,
    SummaryRow,
    TrialRecord,
    effective_rate,
    load_scenario_config,
    parse_scenario_config,
    run_scenario,
    write_reports,
)

__all__ = [
    "ArmMeans", "Channel", "Codebook", "PathSpec", "SteeringConfig",
    "arm_means", "array_response", "build_codebook", "group_beam",
    "import_channel", "mean_reward", "synth_channel", "write_channel",
    "BanditInstance", "NoiseConditionReport", "TrackingState",
    "check_noise_condition", "d_hg", "record", "sample_reward",
    "GlrConfig", "WeightSolution", "c_star_u", "f_x", "f_y",
    "glr_statistic", "lower_bound", "pooled_mean", "solve_weights",
    "t_star_u", "threshold",
    "AlgoResult", "BeamOracle", "StepCapExceeded", "TableOracle",
    "eba", "heba", "htands", "ts_baseline", "two_phase_htands", "two_phase_ts",
    "ScenarioConfig", "SummaryRow", "TrialRecord", "effective_rate",
    "load_scenario_config", "parse_scenario_config", "run_scenario",
    "write_reports",
]
