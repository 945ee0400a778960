"""Scenario definitions, Monte Carlo execution, metrics, and CSV reports.

A scenario fixes the array, the channel (synthesized paths or an imported
file), the risk budget, an SNR grid, and a trial count. Each (algorithm,
SNR, trial) triple gets an independent random stream derived from the root
seed by a counter-based split, so results never depend on execution order
or on which other algorithms run.
"""

from __future__ import annotations

import csv
import math
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .bandit import BanditInstance, check_noise_condition
from .channel import (
    Channel,
    Codebook,
    PathSpec,
    SteeringConfig,
    arm_means,
    build_codebook,
    import_channel,
    synth_channel,
)
from .glr import GlrConfig, c_star_u, lower_bound, t_star_u
from .algorithms import (
    AlgoResult,
    BeamOracle,
    DEFAULT_STEP_CAP,
    StepCapExceeded,
    eba,
    heba,
    htands,
    ts_baseline,
    two_phase_htands,
    two_phase_ts,
)

__all__ = [
    "ScenarioConfig",
    "SummaryRow",
    "TrialRecord",
    "BoundsRow",
    "ALGORITHM_IDS",
    "parse_scenario_config",
    "load_scenario_config",
    "build_scenario",
    "run_scenario",
    "effective_rate",
    "write_reports",
]

# stable algorithm identifiers used in the per-trial seed split; adding a
# new algorithm must never renumber an existing one
ALGORITHM_IDS = {
    "eba": 0,
    "ts": 1,
    "hts": 2,
    "heba": 3,
    "2pts": 4,
    "2phts": 5,
    "2phts-overlap": 6,
}

_TWO_PHASE = {"heba", "2pts", "2phts", "2phts-overlap"}


@dataclass(frozen=True)
class ScenarioConfig:
    """Full description of one reproducible experiment."""

    steering: SteeringConfig
    paths: tuple[PathSpec, ...] = ()
    channel_file: str = ""
    channel_gain_db: float = 0.0
    correlation_length: int = 0  # 0 -> default 2*ceil(K/N) - 1
    snr_db_grid: tuple[float, ...] = ()
    noise_dbm: float = -80.0
    delta: float = 0.1
    delta_split: tuple[float, float] = ()
    trials: int = 100
    seed: int = 0
    algorithms: tuple[str, ...] = ("2phts",)
    coherence_slots: int = 14000
    overlapping: bool = False  # phase-two variant of 2phts

    def __post_init__(self):
        if not self.paths and not self.channel_file:
            raise ValueError("scenario needs either channel paths or a channel file")
        if not self.snr_db_grid:
            raise ValueError("snr_db_grid must be non-empty")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        split = self.delta_split or (self.delta / 2.0, self.delta / 2.0)
        object.__setattr__(self, "delta_split", tuple(split))
        if abs(sum(self.delta_split) - self.delta) > 1e-12:
            raise ValueError(
                f"delta_split {self.delta_split} must sum to delta = {self.delta}"
            )
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if self.coherence_slots < 1:
            raise ValueError("coherence_slots must be positive")
        J = self.correlation_length or self.default_correlation_length()
        object.__setattr__(self, "correlation_length", int(J))
        if self.correlation_length < 1:
            raise ValueError("correlation_length must be positive")
        unknown = [a for a in self.algorithms if a not in ALGORITHM_IDS]
        if unknown:
            raise ValueError(f"unknown algorithms {unknown}; known: {sorted(ALGORITHM_IDS)}")

    def default_correlation_length(self) -> int:
        K, N = self.steering.codebook_size, self.steering.num_antennas
        return 2 * math.ceil(K / N) - 1

    @property
    def noise_mw(self) -> float:
        return 10.0 ** (self.noise_dbm / 10.0)

    def tx_power_mw(self, snr_db: float) -> float:
        return self.noise_mw * 10.0 ** (snr_db / 10.0)


@dataclass(frozen=True)
class SummaryRow:
    algorithm: str
    snr_db: float
    trials: int
    mean_tau: float
    std_tau: float
    error_rate: float
    mean_ear: float


@dataclass(frozen=True)
class TrialRecord:
    algorithm: str
    snr_db: float
    trial: int
    seed: int
    tau: int
    tau_phase1: int
    tau_phase2: int
    chosen_arm: int
    correct: bool
    ear: float
    capped: bool = False


@dataclass(frozen=True)
class BoundsRow:
    scenario: str
    snr_db: float
    lower_bound: float
    c_star_u_total: float
    t_star_u: float


def effective_rate(tau: int, coherence_slots: int, mu_star: float, sigma2: float) -> float:
    """Throughput discounted by alignment overhead (bits/s/Hz).

    (1 - tau/(T - tau)) * log2(1 + mu/sigma2) while the overhead factor is
    positive; zero once alignment consumes half the coherence interval.
    """
    T = coherence_slots
    if T <= 0:
        raise ValueError("coherence_slots must be positive")
    if 2 * tau >= T:
        return 0.0
    return (1.0 - tau / (T - tau)) * math.log2(1.0 + mu_star / sigma2)


# ---------------------------------------------------------------------------
# config file parsing: flat `key = value` lines, `#` comments
# ---------------------------------------------------------------------------

def _parse_paths(text: str) -> tuple[PathSpec, ...]:
    specs = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        fields = part.split()
        if len(fields) != 3:
            raise ValueError(
                f"path spec {part!r} must have 3 fields: aod_fraction loss_db phase_rad"
            )
        specs.append(PathSpec(float(fields[0]), float(fields[1]), float(fields[2])))
    return tuple(specs)


def _coerce(key: str, value: str):
    value = value.strip()
    if key in ("num_antennas", "codebook_size", "correlation_length", "trials",
               "seed", "coherence_slots"):
        return int(value)
    if key in ("spacing_ratio", "channel_gain_db", "noise_dbm", "delta"):
        return float(value)
    if key == "snr_db_grid":
        return tuple(float(v) for v in value.replace(",", " ").split())
    if key == "delta_split":
        parts = [float(v) for v in value.replace(",", " ").split()]
        if len(parts) != 2:
            raise ValueError("delta_split needs exactly two values")
        return tuple(parts)
    if key == "algorithms":
        return tuple(value.replace(",", " ").split())
    if key == "paths":
        return _parse_paths(value)
    if key == "channel_file":
        return value
    if key == "overlapping":
        return value.lower() in ("1", "true", "yes", "on")
    raise ValueError(f"unknown config key {key!r}")


def parse_scenario_config(text: str, overrides: dict[str, str] | None = None) -> ScenarioConfig:
    """Parse a flat key = value config; `overrides` are applied on top."""
    raw: dict[str, str] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"line {line_no}: expected `key = value`, got {line!r}")
        key, value = stripped.split("=", 1)
        raw[key.strip()] = value.split("#", 1)[0].strip()
    for key, value in (overrides or {}).items():
        raw[key.strip()] = value
    values = {key: _coerce(key, val) for key, val in raw.items()}

    steering = SteeringConfig(
        num_antennas=values.pop("num_antennas"),
        spacing_ratio=values.pop("spacing_ratio", 0.5),
        codebook_size=values.pop("codebook_size"),
    )
    return ScenarioConfig(steering=steering, **values)


def load_scenario_config(path, overrides: dict[str, str] | None = None) -> ScenarioConfig:
    with open(path) as fh:
        return parse_scenario_config(fh.read(), overrides)


# ---------------------------------------------------------------------------
# scenario assembly and execution
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Scenario:
    cfg: ScenarioConfig
    codebook: Codebook
    channel: Channel
    num_arms: int
    group_len: int

    def oracle(self, snr_db: float) -> BeamOracle:
        return BeamOracle(
            self.channel, self.codebook, self.cfg.tx_power_mw(snr_db), self.cfg.noise_mw
        )


def build_scenario(cfg: ScenarioConfig) -> _Scenario:
    codebook = build_codebook(cfg.steering)
    if cfg.channel_file:
        channel = import_channel(cfg.channel_file, expected_n=cfg.steering.num_antennas)
        if cfg.channel_gain_db:
            channel = Channel(h=channel.h * 10.0 ** (cfg.channel_gain_db / 20.0))
    else:
        channel = synth_channel(
            list(cfg.paths),
            cfg.steering.num_antennas,
            gain_db=cfg.channel_gain_db,
            spacing_ratio=cfg.steering.spacing_ratio,
        )
    return _Scenario(
        cfg=cfg,
        codebook=codebook,
        channel=channel,
        num_arms=cfg.steering.codebook_size,
        group_len=cfg.correlation_length,
    )


def trial_seed_sequence(root_seed: int, snr_index: int, algo: str, trial: int):
    """Counter-based per-trial stream: stable under added algorithms/SNRs."""
    return np.random.SeedSequence(root_seed, spawn_key=(snr_index, ALGORITHM_IDS[algo], trial))


def _run_one_trial(scenario: _Scenario, oracle, algo: str, snr_index: int, trial: int,
                   step_cap: int, weight_refresh: int) -> TrialRecord:
    cfg = scenario.cfg
    seq = trial_seed_sequence(cfg.seed, snr_index, algo, trial)
    seed_value = int(seq.generate_state(1)[0])
    rng = np.random.default_rng(seq)
    K, J = scenario.num_arms, scenario.group_len
    flat_arms = [(k,) for k in range(1, K + 1)]
    glr_cfg = GlrConfig(delta=cfg.delta)
    capped = False
    try:
        if algo in _TWO_PHASE:
            if algo == "2phts":
                res = two_phase_htands(
                    oracle, K, J, cfg.delta_split, rng, delta=cfg.delta,
                    overlapping=cfg.overlapping, step_cap=step_cap,
                    weight_refresh=weight_refresh,
                )
            elif algo == "2phts-overlap":
                res = two_phase_htands(
                    oracle, K, J, cfg.delta_split, rng, delta=cfg.delta,
                    overlapping=True, step_cap=step_cap, weight_refresh=weight_refresh,
                )
            elif algo == "2pts":
                res = two_phase_ts(
                    oracle, K, J, cfg.delta_split, rng, delta=cfg.delta,
                    step_cap=step_cap, weight_refresh=weight_refresh,
                )
            else:
                res = heba(
                    oracle, K, J, cfg.delta_split, rng, delta=cfg.delta, step_cap=step_cap
                )
        else:
            if algo == "hts":
                tau, emp = htands(oracle, flat_arms, glr_cfg, rng, step_cap=step_cap,
                                  weight_refresh=weight_refresh)
            elif algo == "ts":
                tau, emp = ts_baseline(oracle, flat_arms, glr_cfg, rng, step_cap=step_cap,
                                       weight_refresh=weight_refresh)
            else:
                tau, emp = eba(oracle, flat_arms, glr_cfg, rng, step_cap=step_cap)
            res = AlgoResult(
                chosen_arm=int(np.argmax(emp)) + 1, tau=tau, phase_taus=(tau,)
            )
    except StepCapExceeded:
        return TrialRecord(
            algorithm=algo, snr_db=cfg.snr_db_grid[snr_index], trial=trial,
            seed=seed_value, tau=step_cap, tau_phase1=step_cap, tau_phase2=0,
            chosen_arm=0, correct=False, ear=0.0, capped=True,
        )

    snr_db = cfg.snr_db_grid[snr_index]
    mu = oracle.mean((res.chosen_arm,))
    true_best = _true_best_arm(scenario, snr_db)
    return TrialRecord(
        algorithm=algo,
        snr_db=snr_db,
        trial=trial,
        seed=seed_value,
        tau=res.tau,
        tau_phase1=res.phase_taus[0],
        tau_phase2=res.phase_taus[1] if len(res.phase_taus) > 1 else 0,
        chosen_arm=res.chosen_arm,
        correct=bool(res.chosen_arm == true_best),
        ear=effective_rate(res.tau, cfg.coherence_slots, mu, cfg.noise_mw),
        capped=capped,
    )


def _true_best_arm(scenario: _Scenario, snr_db: float) -> int:
    means = arm_means(
        scenario.channel, scenario.codebook, scenario.cfg.tx_power_mw(snr_db)
    )
    return means.best_arm


def _run_batch(payload):
    """Worker entry: one (algorithm, snr) batch of trials."""
    cfg, algo, snr_index, step_cap, weight_refresh = payload
    scenario = build_scenario(cfg)
    oracle = scenario.oracle(cfg.snr_db_grid[snr_index])
    return [
        _run_one_trial(scenario, oracle, algo, snr_index, t, step_cap, weight_refresh)
        for t in range(cfg.trials)
    ]


def run_scenario(
    cfg: ScenarioConfig,
    *,
    jobs: int = 1,
    step_cap: int = DEFAULT_STEP_CAP,
    weight_refresh: int = 1,
    scenario_name: str = "scenario",
    compute_bounds: bool = True,
) -> tuple[list[SummaryRow], list[TrialRecord], list[BoundsRow]]:
    """Run every (algorithm, SNR) cell of the scenario over `trials` trials.

    Returns summary rows, per-trial records (ordered by algorithm, SNR,
    trial), and theoretical-bound rows per SNR. Step-cap hits are recorded
    per trial, not fatal. The large-noise condition is evaluated per SNR
    and reported as a warning when it fails.
    """
    scenario = build_scenario(cfg)
    for snr_db in cfg.snr_db_grid:
        inst = _base_instance(scenario, snr_db)
        report = check_noise_condition(inst)
        if not report.holds:
            warnings.warn(
                f"large-noise condition violated at SNR {snr_db} dB "
                f"(sigma2 = {report.sigma2:.3g} mW <= required "
                f"{report.binding_threshold:.3g} mW); GLR risk control is heuristic here",
                stacklevel=2,
            )

    tasks = [
        (cfg, algo, snr_index, step_cap, weight_refresh)
        for algo in cfg.algorithms
        for snr_index in range(len(cfg.snr_db_grid))
    ]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            batches = list(pool.map(_run_batch, tasks))
    else:
        batches = [_run_batch(t) for t in tasks]

    records: list[TrialRecord] = []
    rows: list[SummaryRow] = []
    for task, batch in zip(tasks, batches):
        _, algo, snr_index, _, _ = task
        records.extend(batch)
        taus = np.array([r.tau for r in batch], dtype=float)
        rows.append(
            SummaryRow(
                algorithm=algo,
                snr_db=cfg.snr_db_grid[snr_index],
                trials=len(batch),
                mean_tau=float(taus.mean()),
                std_tau=float(taus.std()),
                error_rate=float(np.mean([not r.correct for r in batch])),
                mean_ear=float(np.mean([r.ear for r in batch])),
            )
        )

    bounds: list[BoundsRow] = []
    if compute_bounds:
        for snr_db in cfg.snr_db_grid:
            bounds.append(_bounds_row(scenario, snr_db, scenario_name))
    return rows, records, bounds


def _base_instance(scenario: _Scenario, snr_db: float) -> BanditInstance:
    means = arm_means(
        scenario.channel, scenario.codebook, scenario.cfg.tx_power_mw(snr_db)
    )
    return BanditInstance(means=means.mu, noise_var=scenario.cfg.noise_mw, labels=means.labels)


def _bounds_row(scenario: _Scenario, snr_db: float, name: str) -> BoundsRow:
    cfg = scenario.cfg
    inst = _base_instance(scenario, snr_db)
    try:
        lb = lower_bound(inst, cfg.delta)
    except (ValueError, RuntimeError):
        lb = float("nan")
    oracle = scenario.oracle(snr_db)
    K, J = scenario.num_arms, scenario.group_len
    groups = [tuple(range((g - 1) * J + 1, min(g * J, K) + 1)) for g in range(1, math.ceil(K / J) + 1)]
    super_means = np.array([oracle.mean(g) for g in groups])
    g_star = int(np.argmax(super_means)) + 1
    G = len(groups)
    left = super_means[g_star - 2] if g_star >= 2 else -np.inf
    right = super_means[g_star] if g_star <= G - 1 else -np.inf
    neighbor = g_star + 1 if right >= left else g_star - 1
    lo_g, hi_g = min(g_star, neighbor), max(g_star, neighbor)
    s_f = [k for k in range((lo_g - 1) * J + 1, hi_g * J + 1) if k <= K]
    base_means = inst.means[[k - 1 for k in s_f]]
    c_total = c_star_u(super_means, cfg.noise_mw) + c_star_u(base_means, cfg.noise_mw)
    return BoundsRow(
        scenario=name,
        snr_db=snr_db,
        lower_bound=lb,
        c_star_u_total=c_total,
        t_star_u=t_star_u(inst.means, cfg.noise_mw),
    )


# ---------------------------------------------------------------------------
# report files
# ---------------------------------------------------------------------------

SUMMARY_HEADER = ["algorithm", "snr_db", "trials", "mean_tau", "std_tau", "error_rate", "mean_ear"]
TRIALS_HEADER = [
    "algorithm", "snr_db", "trial", "seed", "tau", "tau_phase1", "tau_phase2",
    "chosen_arm", "correct",
]
BOUNDS_HEADER = ["scenario", "snr_db", "lower_bound", "c_star_u_total", "t_star_u"]


def write_reports(
    rows: list[SummaryRow],
    records: list[TrialRecord],
    out_dir,
    bounds: list[BoundsRow] | None = None,
    meta: dict | None = None,
) -> list[str]:
    """Write summary.csv, trials.csv, bounds.csv, and the meta echo file."""
    os.makedirs(out_dir, exist_ok=True)
    written = []

    path = os.path.join(out_dir, "summary.csv")
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(SUMMARY_HEADER)
            for r in rows:
                writer.writerow(
                    [r.algorithm, repr(r.snr_db), r.trials, repr(r.mean_tau),
                     repr(r.std_tau), repr(r.error_rate), repr(r.mean_ear)]
                )
    except OSError as exc:
        raise OSError(f"failed writing {path}: {exc}") from exc
    written.append(path)

    path = os.path.join(out_dir, "trials.csv")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRIALS_HEADER)
        for r in records:
            writer.writerow(
                [r.algorithm, repr(r.snr_db), r.trial, r.seed, r.tau, r.tau_phase1,
                 r.tau_phase2, r.chosen_arm, int(r.correct)]
            )
    written.append(path)

    path = os.path.join(out_dir, "bounds.csv")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(BOUNDS_HEADER)
        for b in bounds or []:
            writer.writerow(
                [b.scenario, repr(b.snr_db), repr(b.lower_bound),
                 repr(b.c_star_u_total), repr(b.t_star_u)]
            )
    written.append(path)

    path = os.path.join(out_dir, "meta")
    with open(path, "w") as fh:
        fh.write(f"library_version = {__version__}\n")
        fh.write(f"written_at = {time.strftime('%Y-%m-%dT%H:%M:%S')}\n")
        for key, value in (meta or {}).items():
            fh.write(f"{key} = {value}\n")
    written.append(path)
    return written


def read_summary(path) -> list[SummaryRow]:
    """Parse summary.csv back into rows (round-trip of write_reports)."""
    out = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            out.append(
                SummaryRow(
                    algorithm=rec["algorithm"],
                    snr_db=float(rec["snr_db"]),
                    trials=int(rec["trials"]),
                    mean_tau=float(rec["mean_tau"]),
                    std_tau=float(rec["std_tau"]),
                    error_rate=float(rec["error_rate"]),
                    mean_ear=float(rec["mean_ear"]),
                )
            )
    return out
