"""Fixed-confidence identification algorithms.

All algorithms share one engine: initialize with a single pull per arm,
then loop a sampling rule until the generalized likelihood ratio crosses
ln(alpha * t / delta). The tracking rule steers pull counts toward the
oracle weights with forced exploration of under-pulled arms; the
round-robin rule implements exhaustive scanning. Two-phase wrappers first
identify the best group of beams, then the best beam inside the winning
neighborhood.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .bandit import TrackingState, sample_reward
from .channel import Channel, Codebook, group_beam, mean_reward
from .glr import GlrConfig, HeteroscedasticGlr, PlugInGaussianGlr, threshold

__all__ = [
    "AlgoResult",
    "PhaseStats",
    "StepCapExceeded",
    "BeamOracle",
    "TableOracle",
    "htands",
    "ts_baseline",
    "eba",
    "two_phase_htands",
    "two_phase_ts",
    "heba",
    "DEFAULT_STEP_CAP",
]

DEFAULT_STEP_CAP = 10_000_000


class StepCapExceeded(RuntimeError):
    """A run failed to stop within the configured step cap."""


@dataclass(frozen=True)
class PhaseStats:
    """Counts and empirical means of one engine run at its stopping time."""

    tau: int  # pulls including the per-arm initialization
    tau_delta: int  # pulls after initialization
    counts: np.ndarray
    emp_means: np.ndarray


@dataclass(frozen=True)
class AlgoResult:
    """Outcome of one identification run."""

    chosen_arm: int  # 1-based base-arm index
    tau: int
    phase_taus: tuple[int, ...]
    phases: tuple[PhaseStats, ...] = field(default=(), repr=False)

    def __post_init__(self):
        if self.tau != sum(self.phase_taus):
            raise ValueError("tau must equal the sum of the per-phase step counts")


class BeamOracle:
    """Reward oracle backed by a synthesized or imported channel.

    Querying an index set transmits once on the sum beam of the (1-based,
    consecutive) base arms and returns the received power draw. By default
    the grouped mean is p |h^H sum_k f_k|^2, the combining law under which
    a wide probe collects the full group power (a normalized unit-power
    probe is available via normalize_groups=True). Mean powers are cached
    per index set; the oracle is immutable and shared across trials,
    randomness comes from the caller's generator.
    """

    def __init__(
        self,
        channel: Channel,
        codebook: Codebook,
        p_mw: float,
        sigma2: float,
        normalize_groups: bool = False,
    ):
        self.channel = channel
        self.codebook = codebook
        self.p_mw = p_mw
        self.sigma2 = sigma2
        self.normalize_groups = normalize_groups
        self._mean_cache: dict[tuple, float] = {}

    def mean(self, indices) -> float:
        key = tuple(indices)
        mu = self._mean_cache.get(key)
        if mu is None:
            if self.normalize_groups or len(key) == 1:
                beam = group_beam(self.codebook, key)
            else:
                beam = np.sum([self.codebook.beam(k) for k in key], axis=0)
            mu = mean_reward(self.channel, beam, self.p_mw)
            mu = max(mu, float(np.finfo(float).tiny))
            self._mean_cache[key] = mu
        return mu

    def query(self, indices, rng: np.random.Generator) -> float:
        return sample_reward(self.mean(indices), self.sigma2, rng)


class TableOracle:
    """Reward oracle for synthetic instances given directly by arm means.

    A multi-arm query returns the sum of the member means (a wide probe
    collecting the whole group's power), so two-phase algorithms can run on
    table-backed instances too.
    """

    def __init__(self, means: Sequence[float], sigma2: float):
        self._means = np.asarray(means, dtype=float)
        self.sigma2 = sigma2

    def mean(self, indices) -> float:
        return float(sum(self._means[k - 1] for k in indices))

    def query(self, indices, rng: np.random.Generator) -> float:
        return sample_reward(self.mean(indices), self.sigma2, rng)


def _run_engine(
    oracle,
    arms: Sequence[Sequence[int]],
    cfg: GlrConfig,
    rng: np.random.Generator,
    family,
    sampling: str,
    step_cap: int = DEFAULT_STEP_CAP,
    weight_refresh: int = 1,
) -> PhaseStats:
    """Initialization pulls, then sample/stop until Z(t) >= ln(alpha t / delta)."""
    num = len(arms)
    if num < 2:
        raise ValueError("need at least two arms")
    arm_keys = [tuple(a) for a in arms]
    state = TrackingState(num)
    for i, key in enumerate(arm_keys):
        state.record(i, oracle.query(key, rng))

    tracking = sampling == "tracking"
    if tracking:
        state.set_weights(family.weights(state))
    counts = state.counts
    t = 0
    while True:
        t += 1
        if t > step_cap:
            raise StepCapExceeded(f"no stop within {step_cap} steps")
        if tracking:
            if counts.min() <= max(np.sqrt(t) - 0.5 * num, 0.0):
                arm = int(np.argmin(counts))
            else:
                arm = int(np.argmax(t * state.weights - counts))
        else:
            arm = (t - 1) % num
        state.record(arm, oracle.query(arm_keys[arm], rng))
        z, _ = family.glr(state)
        if tracking and t % weight_refresh == 0:
            state.set_weights(family.weights(state))
        if z >= threshold(t, cfg):
            break
    return PhaseStats(
        tau=num + t, tau_delta=t, counts=state.counts.copy(), emp_means=state.emp_means.copy()
    )


def _family_for(kind: str, sigma2: float):
    if kind == "het":
        return HeteroscedasticGlr(sigma2)
    if kind == "quad":
        return PlugInGaussianGlr(sigma2)
    raise ValueError(f"unknown divergence family {kind!r}")


def htands(
    oracle,
    arms: Sequence[Sequence[int]],
    cfg: GlrConfig,
    rng: np.random.Generator,
    *,
    step_cap: int = DEFAULT_STEP_CAP,
    weight_refresh: int = 1,
) -> tuple[int, np.ndarray]:
    """Heteroscedastic track-and-stop over the given arm index sets.

    Returns (tau, empirical means); tau counts the per-arm initialization
    pulls. The recommendation is the empirical best arm.
    """
    stats = _run_engine(
        oracle, arms, cfg, rng, _family_for("het", oracle.sigma2), "tracking",
        step_cap=step_cap, weight_refresh=weight_refresh,
    )
    return stats.tau, stats.emp_means


def ts_baseline(
    oracle,
    arms: Sequence[Sequence[int]],
    cfg: GlrConfig,
    rng: np.random.Generator,
    *,
    step_cap: int = DEFAULT_STEP_CAP,
    weight_refresh: int = 1,
) -> tuple[int, np.ndarray]:
    """Track-and-stop that ignores heteroscedasticity.

    Identical loop skeleton, with the plain Gaussian divergence at the
    plug-in common variance 2 sigma2 max_k mu_hat_k(t).
    """
    stats = _run_engine(
        oracle, arms, cfg, rng, _family_for("quad", oracle.sigma2), "tracking",
        step_cap=step_cap, weight_refresh=weight_refresh,
    )
    return stats.tau, stats.emp_means


def eba(
    oracle,
    arms: Sequence[Sequence[int]],
    cfg: GlrConfig,
    rng: np.random.Generator,
    *,
    step_cap: int = DEFAULT_STEP_CAP,
) -> tuple[int, np.ndarray]:
    """Exhaustive scan: round-robin pulls with the heteroscedastic stop rule."""
    stats = _run_engine(
        oracle, arms, cfg, rng, _family_for("het", oracle.sigma2), "round_robin",
        step_cap=step_cap,
    )
    return stats.tau, stats.emp_means


def _build_groups(num_arms: int, group_len: int) -> list[tuple[int, ...]]:
    """Consecutive groups of `group_len` 1-based arms; a short last group is
    padded by repeating the final arm (padding never reaches phase two)."""
    groups = []
    for start in range(1, num_arms + 1, group_len):
        idx = list(range(start, min(start + group_len, num_arms + 1)))
        while len(idx) < group_len:
            idx.append(num_arms)
        groups.append(tuple(idx))
    return groups


def _phase_two_arms(
    g_star: int,
    group_means: np.ndarray,
    num_arms: int,
    group_len: int,
    overlapping: bool,
    window_override: Sequence[int] | None = None,
) -> list[int]:
    """Base arms searched in phase two (2*J of them)."""
    J = group_len
    G = group_means.size
    if window_override is not None:
        window = sorted(set(int(k) for k in window_override))
        if len(window) != 2 * J:
            raise ValueError(f"window override must contain {2*J} distinct arms")
        return window
    if overlapping:
        # 2J-arm window centered on the winning group, clipped inside [1, K]
        start = (g_star - 1) * J + 1 - J // 2
        start = min(max(start, 1), num_arms - 2 * J + 1)
        return list(range(start, start + 2 * J))
    left = group_means[g_star - 2] if g_star >= 2 else -np.inf
    right = group_means[g_star] if g_star <= G - 1 else -np.inf
    neighbor = g_star + 1 if right >= left else g_star - 1
    lo_g, hi_g = min(g_star, neighbor), max(g_star, neighbor)
    arms = list(range((lo_g - 1) * J + 1, hi_g * J + 1))
    return [k for k in arms if k <= num_arms]


def _two_phase(
    engine: Callable,
    oracle,
    num_arms: int,
    group_len: int,
    delta_pair: tuple[float, float],
    alpha: float,
    rng: np.random.Generator,
    delta_total: float,
    *,
    overlapping: bool = False,
    window_override: Sequence[int] | None = None,
    step_cap: int = DEFAULT_STEP_CAP,
    weight_refresh: int = 1,
    engine_kwargs: dict | None = None,
) -> AlgoResult:
    delta1, delta2 = delta_pair
    if abs((delta1 + delta2) - delta_total) > 1e-12:
        raise ValueError(
            f"risk split must satisfy delta1 + delta2 = delta, got {delta1} + {delta2} != {delta_total}"
        )
    if num_arms < 2 * group_len:
        raise ValueError("need at least two groups of arms")
    kwargs = dict(engine_kwargs or {})
    kwargs.setdefault("step_cap", step_cap)

    groups = _build_groups(num_arms, group_len)
    cfg1 = GlrConfig(delta=delta1, alpha=alpha)
    stats1 = engine(oracle, groups, cfg1, rng, weight_refresh=weight_refresh, **kwargs)
    g_star = int(np.argmax(stats1.emp_means)) + 1

    base_arms = _phase_two_arms(
        g_star, stats1.emp_means, num_arms, group_len, overlapping, window_override
    )
    cfg2 = GlrConfig(delta=delta2, alpha=alpha)
    stats2 = engine(
        oracle, [(k,) for k in base_arms], cfg2, rng, weight_refresh=weight_refresh, **kwargs
    )
    chosen = base_arms[int(np.argmax(stats2.emp_means))]
    return AlgoResult(
        chosen_arm=chosen,
        tau=stats1.tau + stats2.tau,
        phase_taus=(stats1.tau, stats2.tau),
        phases=(stats1, stats2),
    )


def _het_engine(oracle, arms, cfg, rng, *, step_cap, weight_refresh):
    return _run_engine(
        oracle, arms, cfg, rng, _family_for("het", oracle.sigma2), "tracking",
        step_cap=step_cap, weight_refresh=weight_refresh,
    )


def _quad_engine(oracle, arms, cfg, rng, *, step_cap, weight_refresh):
    return _run_engine(
        oracle, arms, cfg, rng, _family_for("quad", oracle.sigma2), "tracking",
        step_cap=step_cap, weight_refresh=weight_refresh,
    )


def _eba_engine(oracle, arms, cfg, rng, *, step_cap, weight_refresh=1):
    return _run_engine(
        oracle, arms, cfg, rng, _family_for("het", oracle.sigma2), "round_robin",
        step_cap=step_cap,
    )


def two_phase_htands(
    oracle,
    num_arms: int,
    group_len: int,
    delta_pair: tuple[float, float],
    rng: np.random.Generator,
    *,
    delta: float | None = None,
    alpha: float = 1.0,
    overlapping: bool = False,
    window_override: Sequence[int] | None = None,
    step_cap: int = DEFAULT_STEP_CAP,
    weight_refresh: int = 1,
) -> AlgoResult:
    """Two-phase heteroscedastic track-and-stop.

    Phase one runs over the K/J grouped beams at risk delta1; phase two
    searches the winning group joined with its better-looking neighbor (or,
    with `overlapping`, the 2J-arm window centered on the winner) at risk
    delta2. The split must satisfy delta1 + delta2 = delta.
    """
    if delta is None:
        delta = delta_pair[0] + delta_pair[1]
    return _two_phase(
        _het_engine, oracle, num_arms, group_len, delta_pair, alpha, rng, delta,
        overlapping=overlapping, window_override=window_override,
        step_cap=step_cap, weight_refresh=weight_refresh,
    )


def two_phase_ts(
    oracle,
    num_arms: int,
    group_len: int,
    delta_pair: tuple[float, float],
    rng: np.random.Generator,
    *,
    delta: float | None = None,
    alpha: float = 1.0,
    step_cap: int = DEFAULT_STEP_CAP,
    weight_refresh: int = 1,
) -> AlgoResult:
    """Two-phase track-and-stop with the plug-in Gaussian engine in each phase."""
    if delta is None:
        delta = delta_pair[0] + delta_pair[1]
    return _two_phase(
        _quad_engine, oracle, num_arms, group_len, delta_pair, alpha, rng, delta,
        step_cap=step_cap, weight_refresh=weight_refresh,
    )


def heba(
    oracle,
    num_arms: int,
    group_len: int,
    delta_pair: tuple[float, float],
    rng: np.random.Generator,
    *,
    delta: float | None = None,
    alpha: float = 1.0,
    step_cap: int = DEFAULT_STEP_CAP,
) -> AlgoResult:
    """Hierarchical exhaustive scan: round-robin engine in both phases."""
    if delta is None:
        delta = delta_pair[0] + delta_pair[1]
    return _two_phase(
        _eba_engine, oracle, num_arms, group_len, delta_pair, alpha, rng, delta,
        step_cap=step_cap,
    )
