"""Heteroscedastic Gaussian bandit instances, reward sampling, and run statistics.

An arm with mean reward mu (mW) under noise variance sigma2 (mW) pays out
N(mu, 2*mu*sigma2); the variance is proportional to the mean.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BanditInstance",
    "TrackingState",
    "NoiseConditionReport",
    "sample_reward",
    "d_hg",
    "noise_condition_thresholds",
    "check_noise_condition",
    "record",
]


@dataclass(frozen=True)
class BanditInstance:
    """A set of heteroscedastic Gaussian arms N(mu_k, 2*mu_k*sigma2)."""

    means: np.ndarray
    noise_var: float
    labels: tuple = field(default=())

    def __post_init__(self):
        means = np.asarray(self.means, dtype=float)
        object.__setattr__(self, "means", means)
        if means.ndim != 1 or means.size < 1:
            raise ValueError("means must be a non-empty vector")
        if not np.all(means > 0):
            raise ValueError("all arm means must be strictly positive")
        if self.noise_var <= 0:
            raise ValueError("noise_var must be strictly positive")
        top = means.max()
        if means.size > 1 and np.sum(means == top) > 1:
            raise ValueError("instance must have a unique optimal arm (exact tie found)")

    @property
    def size(self) -> int:
        return self.means.size

    @property
    def best_arm(self) -> int:
        """0-based index of the unique optimal arm."""
        return int(np.argmax(self.means))


class TrackingState:
    """Mutable per-run statistics: counts, reward sums, empirical means, weights.

    Single-writer: one state per algorithm run. `t` counts every pull,
    including the one-per-arm initialization pulls once they are recorded.
    """

    __slots__ = ("t", "counts", "sums", "emp_means", "weights")

    def __init__(self, num_arms: int):
        if num_arms < 1:
            raise ValueError("need at least one arm")
        self.t = 0
        self.counts = np.zeros(num_arms, dtype=np.int64)
        self.sums = np.zeros(num_arms, dtype=float)
        self.emp_means = np.zeros(num_arms, dtype=float)
        self.weights = np.full(num_arms, 1.0 / num_arms)

    @property
    def num_arms(self) -> int:
        return self.counts.size

    def record(self, arm: int, reward: float) -> "TrackingState":
        if not 0 <= arm < self.num_arms:
            raise IndexError(f"arm {arm} out of range")
        self.t += 1
        self.counts[arm] += 1
        self.sums[arm] += reward
        self.emp_means[arm] = self.sums[arm] / self.counts[arm]
        return self

    def set_weights(self, w: np.ndarray) -> None:
        w = np.asarray(w, dtype=float)
        if w.shape != self.weights.shape or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("weights must be a simplex vector over the arms")
        self.weights = w

    def copy(self) -> "TrackingState":
        out = TrackingState(self.num_arms)
        out.t = self.t
        out.counts = self.counts.copy()
        out.sums = self.sums.copy()
        out.emp_means = self.emp_means.copy()
        out.weights = self.weights.copy()
        return out


def record(state: TrackingState, arm: int, reward: float) -> TrackingState:
    """Fold one observation into the run statistics (updates `state` in place)."""
    return state.record(arm, reward)


def sample_reward(mu: float, sigma2: float, rng: np.random.Generator) -> float:
    """One draw from N(mu, 2*mu*sigma2). sigma2 = 0 degenerates to mu exactly."""
    if mu <= 0:
        raise ValueError("mu must be strictly positive")
    if sigma2 < 0:
        raise ValueError("sigma2 must be nonnegative")
    if sigma2 == 0.0:
        return float(mu)
    return float(rng.normal(mu, np.sqrt(2.0 * mu * sigma2)))


def d_hg(mu_i, mu_j, sigma2: float):
    """KL divergence between N(mu_i, 2*mu_i*sigma2) and N(mu_j, 2*mu_j*sigma2).

    Accepts scalars or numpy arrays (broadcast); both means must be positive.
    """
    mu_i = np.asarray(mu_i, dtype=float)
    mu_j = np.asarray(mu_j, dtype=float)
    out = (
        0.5 * np.log(mu_j / mu_i)
        + mu_i / (2.0 * mu_j)
        + (mu_j - mu_i) ** 2 / (4.0 * mu_j * sigma2)
        - 0.5
    )
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class NoiseConditionReport:
    """Verdict of the large-noise condition plus per-arm threshold details.

    `thresholds[k]` is the sigma2 level arm k requires (NaN for the optimal
    arm and for arms whose denominator is nonpositive, which impose no
    constraint and are vacuously satisfied).
    """

    holds: bool
    sigma2: float
    thresholds: np.ndarray
    vacuous: np.ndarray  # True where the arm imposes no constraint

    @property
    def binding_threshold(self) -> float:
        finite = self.thresholds[np.isfinite(self.thresholds)]
        return float(finite.max()) if finite.size else float("nan")


def noise_condition_thresholds(means: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-arm sigma2 thresholds of the large-noise condition.

    For each suboptimal arm k the threshold is
    (mu_1 - mu_k)^2 / (4 mu_k - 2 mu_1 - 2 mu_k ln(mu_k / mu_1)); arms where
    the denominator is nonpositive constrain nothing (threshold NaN,
    flagged vacuous), as does the optimal arm itself.
    """
    means = np.asarray(means, dtype=float)
    best = int(np.argmax(means))
    mu1 = means[best]
    thresholds = np.full(means.size, np.nan)
    vacuous = np.ones(means.size, dtype=bool)
    for k in range(means.size):
        if k == best:
            continue
        muk = means[k]
        denom = 4.0 * muk - 2.0 * mu1 - 2.0 * muk * np.log(muk / mu1)
        if denom > 0:
            thresholds[k] = (mu1 - muk) ** 2 / denom
            vacuous[k] = False
    return thresholds, vacuous


def check_noise_condition(inst: BanditInstance) -> NoiseConditionReport:
    """Evaluate the large-noise condition sigma2 > max_k threshold_k."""
    thresholds, vacuous = noise_condition_thresholds(inst.means)
    finite = thresholds[np.isfinite(thresholds)]
    holds = bool(finite.size == 0 or inst.noise_var > finite.max())
    return NoiseConditionReport(
        holds=holds, sigma2=inst.noise_var, thresholds=thresholds, vacuous=vacuous
    )
