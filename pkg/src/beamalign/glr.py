"""Statistics on the heteroscedastic KL geometry.

Provides the pooled GLR mean, the stopping statistic Z(t) and its threshold,
the oracle-weight solver (bisection on the scalar stationarity equation),
and the theoretical bound calculators. A parallel set of "quadratic"
routines implements the same machinery for plain Gaussian divergences with
a plug-in common variance, used by the track-and-stop baseline.

All divergence computations are scale-invariant under a joint scaling of
means and noise variance, so the solver normalizes by the best mean for
conditioning. Derivatives are always taken by central finite differences on
the implemented objective; no closed-form derivative expressions are used.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bandit import TrackingState, BanditInstance, d_hg

__all__ = [
    "GlrConfig",
    "WeightSolution",
    "pooled_mean",
    "glr_statistic",
    "threshold",
    "f_y",
    "f_x",
    "solve_weights",
    "lower_bound",
    "c_star_u",
    "t_star_u",
    "threshold_series_partial_sum",
    "solve_weights_quadratic",
    "glr_statistic_quadratic",
    "HeteroscedasticGlr",
    "PlugInGaussianGlr",
]

# relative floor applied to nonpositive/tiny empirical means before they
# enter a divergence (the reward model lives on positive means only)
_CLAMP_REL = 1e-12
_MAX_BISECT = 200


@dataclass(frozen=True)
class GlrConfig:
    """Stopping-rule parameters: threshold constant alpha and risk delta."""

    delta: float
    alpha: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.alpha < 1.0:
            raise ValueError(f"alpha must be >= 1, got {self.alpha}")


@dataclass(frozen=True)
class WeightSolution:
    """Oracle sampling weights with the scalar dual solution and sup-inf value."""

    weights: np.ndarray
    y_star: float
    objective: float

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("weights must lie on the simplex")
        if not self.objective > 0:
            raise ValueError("objective must be positive")


def threshold(t: int, cfg: GlrConfig) -> float:
    """Stopping threshold beta(t, delta, alpha) = ln(alpha * t / delta)."""
    if t < 1:
        raise ValueError("t must be >= 1")
    return float(np.log(cfg.alpha * t / cfg.delta))


def pooled_mean(mu_best: float, mu_i: float, t_best, t_i):
    """Common mean (t_b + t_i) mu_b mu_i / (t_b mu_i + t_i mu_b).

    This is the count-weighted harmonic-type mean the GLR plugs in for both
    arms of a pair; at equal counts it reduces to the harmonic mean.
    Accepts arrays for vectorized use.
    """
    num = (t_best + t_i) * mu_best * mu_i
    den = t_best * mu_i + t_i * mu_best
    out = num / den
    return float(out) if np.ndim(out) == 0 else out


# substitute mean, in units of sigma2 / count, for an arm whose T-sample
# average is nonpositive: the level that still produces a nonpositive
# average with ~2% probability, i.e. the arm is treated as "possibly this
# strong" rather than as confidently dead
_FLOOR_SCALE = 8.0


def clamp_positive(
    emp_means: np.ndarray, sigma2: float, counts: np.ndarray | None = None
) -> np.ndarray:
    """Map empirical means onto the positive domain before divergence use.

    The reward law lives on positive means, but empirical means of weak
    arms go negative routinely. A nonpositive T-sample average is replaced
    by _FLOOR_SCALE * sigma2 / T, the largest mean still statistically
    consistent with what was observed; positive means pass through
    untouched (up to a relative epsilon guarding against denormal values).
    Raw statistics are never altered; only the divergence inputs are.
    """
    if counts is None:
        counts = np.ones_like(emp_means)
    substitute = _FLOOR_SCALE * sigma2 / np.maximum(counts, 1)
    out = np.where(emp_means > 0, emp_means, substitute)
    top = float(np.max(out)) if out.size else 0.0
    if top > 0:
        out = np.maximum(out, _CLAMP_REL * top)
    return out


def glr_statistic(state: TrackingState, sigma2: float) -> tuple[float, int]:
    """Heteroscedastic GLR statistic Z(t) and the minimizing rival arm.

    Z is the explicit minimum over every rival i of
    T_b * D(mu_b, q_i) + T_i * D(mu_i, q_i) at the pooled mean q_i; ties for
    the empirical best break to the lowest index. Requires every arm pulled
    at least once.
    """
    if np.any(state.counts == 0):
        raise ValueError("Z(t) requires at least one pull of every arm")
    mu = clamp_positive(state.emp_means, sigma2, state.counts)
    best = int(np.argmax(state.emp_means))
    rivals = np.arange(state.num_arms) != best
    mu_b, t_b = mu[best], state.counts[best]
    mu_r, t_r = mu[rivals], state.counts[rivals]
    q = pooled_mean(mu_b, mu_r, t_b, t_r)
    z = t_b * d_hg(mu_b, q, sigma2) + t_r * d_hg(mu_r, q, sigma2)
    j = int(np.argmin(z))
    rival_index = int(np.flatnonzero(rivals)[j])
    return float(z[j]), rival_index


def glr_statistic_quadratic(state: TrackingState, variance: float) -> tuple[float, int]:
    """Gaussian GLR with a common plug-in variance; pooled mean is arithmetic."""
    if np.any(state.counts == 0):
        raise ValueError("Z(t) requires at least one pull of every arm")
    mu = state.emp_means
    best = int(np.argmax(mu))
    rivals = np.arange(state.num_arms) != best
    mu_b, t_b = mu[best], state.counts[best]
    mu_r, t_r = mu[rivals], state.counts[rivals]
    q = (t_b * mu_b + t_r * mu_r) / (t_b + t_r)
    z = (t_b * (mu_b - q) ** 2 + t_r * (mu_r - q) ** 2) / (2.0 * variance)
    j = int(np.argmin(z))
    return float(z[j]), int(np.flatnonzero(rivals)[j])


# ---------------------------------------------------------------------------
# weight-ratio objective f_y and its inverse
#
# Working in units of the best mean (best = 1, rival = r, noise = s), the
# inner pairwise value at weight ratio x = w_i / w_best is
#     f_y(x) = D(1, q(x)) + x * D(r, q(x)),   q(x) = (1 + x) r / (r + x),
# which rises strictly from 0 to D(1, r) as x goes from 0 to infinity.
# ---------------------------------------------------------------------------


def _fy_norm(x, r, s):
    q = (1.0 + x) * r / (r + x)
    return d_hg(1.0, q, s) + x * d_hg(r, q, s)


def f_y(x: float, mu_best: float, mu_i: float, sigma2: float) -> float:
    """Pairwise objective value at weight ratio x (rival weight over best weight)."""
    if not mu_best > mu_i > 0:
        raise ValueError("need mu_best > mu_i > 0")
    if x < 0:
        raise ValueError("x must be nonnegative")
    return float(_fy_norm(float(x), mu_i / mu_best, sigma2 / mu_best))


def _fx_bisect(y, r, s, atol: float = 1e-10):
    """Invert f_y by expanding-bracket bisection, vectorized over rivals.

    `y` may be scalar or an array matching `r`. Stops when the residual in y
    is within `atol` or the bracket is machine-tight; atol=0 forces the
    machine-tight bracket (needed when the result feeds a finite
    difference).
    """
    y = np.broadcast_to(np.asarray(y, dtype=float), np.shape(r)).copy()
    lo = np.zeros_like(y)
    hi = np.ones_like(y)
    for _ in range(_MAX_BISECT):
        need = _fy_norm(hi, r, s) < y
        if not need.any():
            break
        hi = np.where(need, hi * 2.0, hi)
    else:
        raise RuntimeError("could not bracket f_x (y too close to its supremum?)")
    x = 0.5 * (lo + hi)
    eps = np.finfo(float).eps
    for _ in range(_MAX_BISECT):
        res = _fy_norm(x, r, s) - y
        done = (np.abs(res) <= atol) | ((hi - lo) <= 4 * eps * np.maximum(hi, np.finfo(float).tiny))
        if done.all():
            break
        lo = np.where(res < 0, x, lo)
        hi = np.where(res >= 0, x, hi)
        x = np.where(done, x, 0.5 * (lo + hi))
    return x


def _fx_init(y, r, s, y_max):
    """Initial guess for inverting f_y: exact slope at 0, right pole at y_max."""
    slope0 = d_hg(r, 1.0, s)  # f_y'(0) ... the pairwise divergence back toward the best
    frac = np.clip(y / y_max, 0.0, 1.0 - 1e-12)
    return np.maximum(y / (slope0 * (1.0 - frac)), 1e-300)


def f_x(y: float, mu_best: float, mu_i: float, sigma2: float) -> float:
    """Inverse of f_y: the unique x >= 0 with f_y(x) = y.

    Domain 0 <= y < d_hg(mu_best, mu_i, sigma2); found by bracketing
    bisection to absolute tolerance 1e-10 in y.
    """
    if not mu_best > mu_i > 0:
        raise ValueError("need mu_best > mu_i > 0")
    r = mu_i / mu_best
    s = sigma2 / mu_best
    y_max = d_hg(1.0, r, s)
    if not 0.0 <= y < y_max:
        raise ValueError(f"y={y} outside the domain [0, {y_max})")
    if y == 0.0:
        return 0.0
    return float(_fx_bisect(y, np.asarray([r]), s)[0])


# ---------------------------------------------------------------------------
# stationarity equation  sum_i [ y f_x_i'(y) - f_x_i(y) ] = 1
# ---------------------------------------------------------------------------


def _stationarity_spec(y, r, s, y_max, richardson: bool = False):
    """F(y) via bisection inverses and central finite differences on f_x.

    The shifted inversions run to a machine-tight bracket (atol=0) so the
    difference quotient is not polluted by root-solve slack.
    """
    xs = _fx_bisect(y, r, s, atol=0.0)
    h = np.minimum(1e-6 * y, 0.49 * (y_max - y))
    h = np.minimum(h, 0.49 * y)
    x_hi = _fx_bisect(y + h, r, s, atol=0.0)
    x_lo = _fx_bisect(y - h, r, s, atol=0.0)
    deriv = (x_hi - x_lo) / (2.0 * h)
    if richardson:
        x_hi2 = _fx_bisect(y + 0.5 * h, r, s, atol=0.0)
        x_lo2 = _fx_bisect(y - 0.5 * h, r, s, atol=0.0)
        deriv = (4.0 * (x_hi2 - x_lo2) / h - deriv) / 3.0
    return float(np.sum(y * deriv - xs)), xs


class _FyFused:
    """f_y with per-run constants folded in, for the solver's hot loop.

    Uses the cancellation-free forms q - 1 = -x(1-r)/(r+x) and
    q - r = r(1-r)/(r+x), so the quadratic term stays accurate deep into
    the pole region.
    """

    __slots__ = ("r", "r_sq", "half_log_r", "c_quad", "c_mid")

    def __init__(self, r, s):
        self.r = r
        self.r_sq = r * r
        self.half_log_r = 0.5 * np.log(r)
        self.c_quad = (1.0 - r) ** 2 / (4.0 * s * r)
        self.c_mid = 0.5 / r

    def __call__(self, x):
        a = 1.0 + x
        b = self.r + x
        inv_a = 1.0 / a
        log_term = 0.5 * a * (np.log(a) - np.log(b)) + self.half_log_r
        mid_term = self.c_mid * (1.0 + x * self.r) * b * inv_a
        quad_term = self.c_quad * x * (x + self.r_sq) / b * inv_a
        return log_term + mid_term + quad_term - 0.5 * a


def _fx_illinois(y, fy, r, s, y_max, x_warm=None, max_iter: int = 120,
                 tol_rel: float = 1e-12):
    """Invert f_y by the Illinois variant of false position, vectorized.

    Always maintains a sign bracket per rival; a warm iterate `x_warm`
    seeds a tight bracket. Residual tolerance `tol_rel` relative in y.
    """
    y = np.broadcast_to(np.asarray(y, dtype=float), np.shape(r)).copy()
    tol = tol_rel * (1.0 + np.abs(y))
    lo = np.zeros_like(y)
    flo = -y.copy()  # residual at x = 0
    if x_warm is None:
        hi = _fx_init(y, r, s, y_max)
        fhi = fy(hi) - y
    else:
        seed, width = x_warm
        seed = np.maximum(seed, 1e-300)
        s_lo = (1.0 - width) * seed
        f_slo = fy(s_lo) - y
        below = f_slo < 0
        lo = np.where(below, s_lo, lo)
        flo = np.where(below, f_slo, flo)
        hi = np.where(below, (1.0 + 1.8 * width) * seed, s_lo)
        fhi = np.where(below, fy(hi) - y, f_slo)
    for _ in range(80):
        need = fhi < 0
        if not need.any():
            break
        lo = np.where(need, hi, lo)
        flo = np.where(need, fhi, flo)
        hi = np.where(need, hi * 8.0, hi)
        fhi = np.where(need, fy(hi) - y, fhi)
    else:
        raise RuntimeError("could not bracket f_x (y too close to its supremum?)")
    x = hi.copy()
    res = fhi.copy()
    side = np.zeros_like(y)  # +1: last update was hi, -1: lo
    for _ in range(max_iter):
        act = np.abs(res) > tol
        if not act.any():
            break
        cand = hi - fhi * (hi - lo) / (fhi - flo)
        bad = ~np.isfinite(cand) | (cand <= lo) | (cand >= hi)
        if bad.any():
            cand[bad] = 0.5 * (lo[bad] + hi[bad])
        fc = fy(cand) - y
        up = (fc > 0) & act
        dn = ~(fc > 0) & act
        # Illinois: halve the retained endpoint's residual on repeated sides
        flo[up & (side > 0)] *= 0.5
        fhi[dn & (side < 0)] *= 0.5
        hi[up] = cand[up]
        fhi[up] = fc[up]
        lo[dn] = cand[dn]
        flo[dn] = fc[dn]
        side[up] = 1.0
        side[dn] = -1.0
        x[act] = cand[act]
        res[act] = fc[act]
    return x


class _FastStationarity:
    """Stationarity map F(y) with per-rival inversions warm-started across calls.

    f_x' is evaluated as 1 / f_y'(x) with f_y' by central finite differences,
    which matches the direct finite difference of f_x to O(h^2).
    """

    def __init__(self, r, s, y_max, mult=None):
        self.r, self.s, self.y_max = r, s, y_max
        self.mult = mult  # rival multiplicities (deduplicated ratios)
        self.fy = _FyFused(r, s)
        self._xs = None
        self._last_y = None

    def __call__(self, y):
        # a warm iterate only helps for nearby y; after a large jump the
        # pole-aware initializer does better than a stale bracket
        x_warm = None
        if self._last_y is not None and 0.75 < y / self._last_y < 1.33:
            drift = abs(y / self._last_y - 1.0)
            width = min(0.5, max(0.05, 4.0 * drift))
            x_warm = (self._xs, width)
        xs = _fx_illinois(
            y, self.fy, self.r, self.s, self.y_max, x_warm=x_warm, tol_rel=5e-11
        )
        self._xs, self._last_y = xs, y
        h = 1e-6 * (1.0 + xs)
        x_minus = np.maximum(xs - h, 0.0)
        f_hi = self.fy(xs + h)
        f_lo = self.fy(x_minus)
        diff = f_hi - f_lo
        # an underflowing difference means a rival is pinned at its pole,
        # where the true contribution to F is enormous
        if np.any(diff <= 8 * np.finfo(float).eps * np.abs(f_hi)):
            return float("inf"), xs
        fy_slope = diff / (xs + h - x_minus)
        terms = y / fy_slope - xs
        if self.mult is not None:
            terms = terms * self.mult
        return float(np.sum(terms)), xs


def _bracket_low(fn, y_hi):
    """Find y_lo with F(y_lo) < 1, shrinking geometrically from y_hi."""
    y_lo = y_hi * 1e-9
    for _ in range(8):
        f_lo, _ = fn(y_lo)
        if f_lo < 1.0:
            return y_lo, f_lo
        y_lo *= 1e-3
    raise RuntimeError(
        "stationarity equation has no sign change on the bracket; "
        "the instance likely violates the solver's preconditions"
    )


def _mono_ok(f_mid, f_lo, f_hi):
    # F may dip below its small-y values far from the root (the map is only
    # guaranteed nondecreasing under the large-noise condition), so the
    # assertion is enforced in the band around the F = 1 crossing where a
    # violation would corrupt the found root
    if not 0.25 <= f_mid <= 4.0:
        return True
    tol = max(1e-6, 1e-3 * abs(f_mid))
    lo_ref = min(f_lo, f_hi)
    hi_ref = max(f_lo, f_hi)
    return (f_mid >= lo_ref - tol or f_lo < 0.25) and (f_mid <= hi_ref + tol or f_hi > 4.0)


def _solve_y_bisect(fn, y_lo, y_hi, f_lo, f_hi, atol):
    """Pure bisection on F(y) = 1, asserting monotonicity of F near the root."""
    while (y_hi - y_lo) > max(atol, 8 * np.finfo(float).eps * y_hi):
        mid = 0.5 * (y_lo + y_hi)
        if mid <= y_lo or mid >= y_hi:
            break
        f_mid, _ = fn(mid)
        if not _mono_ok(f_mid, f_lo, f_hi):
            f_mid, _ = fn(mid, richardson=True)
            if not _mono_ok(f_mid, f_lo, f_hi):
                raise RuntimeError(
                    "stationarity map failed its monotonicity check near the root; "
                    "solver preconditions violated"
                )
        if f_mid < 1.0:
            y_lo, f_lo = mid, f_mid
        else:
            y_hi, f_hi = mid, f_mid
    return y_lo, y_hi


def _solve_y_fast(fn, y_lo, y_hi, f_lo, f_hi, atol, warm=None):
    """Root of F(y) = 1 by log-space bisection plus bracketed secant.

    F spans many orders of magnitude over the bracket, so plain secant from
    the endpoints crawls; bisecting in log y first localizes the crossing,
    after which secant converges in a few evaluations. A valid `warm` guess
    (e.g. the previous time step's root) short-circuits the localization.
    The endpoint values may be the limit priors (F -> 0 at the bottom,
    F -> +inf at the pole) rather than evaluations.
    """
    if warm is not None and y_lo < warm < y_hi:
        f_w, _ = fn(warm)
        if f_w < 1.0:
            y_lo, f_lo = warm, f_w
        else:
            y_hi, f_hi = warm, f_w
        # second probe caps the root near the warm point when drift is small
        for bump in (0.03, 0.5):
            if f_w < 1.0:
                cand = y_lo * (1.0 + bump)
            else:
                cand = y_hi / (1.0 + bump)
            if not y_lo < cand < y_hi:
                break
            f_c, _ = fn(cand)
            if f_c < 1.0:
                y_lo, f_lo = cand, f_c
            else:
                y_hi, f_hi = cand, f_c
            if 0.0 < f_lo and np.isfinite(f_hi):
                break
    # localize in log space until the bracket is within a factor ~1.3
    while y_hi / max(y_lo, 1e-300) > 1.3 and (y_hi - y_lo) > atol:
        mid = float(np.sqrt(y_lo * y_hi))
        if not y_lo < mid < y_hi:
            break
        f_mid, _ = fn(mid)
        if f_mid < 1.0:
            y_lo, f_lo = mid, f_mid
        else:
            y_hi, f_hi = mid, f_mid
    # Illinois false position on g = F - 1
    g_lo, g_hi = f_lo - 1.0, f_hi - 1.0
    side = 0
    while (y_hi - y_lo) > max(atol, 8 * np.finfo(float).eps * y_hi):
        if np.isfinite(g_lo) and np.isfinite(g_hi) and g_hi > g_lo:
            cand = y_hi - g_hi * (y_hi - y_lo) / (g_hi - g_lo)
        else:
            cand = 0.5 * (y_lo + y_hi)
        if not y_lo < cand < y_hi:
            cand = 0.5 * (y_lo + y_hi)
        if cand <= y_lo or cand >= y_hi:
            break
        f_c, _ = fn(cand)
        if f_c >= 1.0:
            if side > 0:
                g_lo *= 0.5
            y_hi, g_hi, side = cand, f_c - 1.0, 1
        else:
            if side < 0:
                g_hi *= 0.5
            y_lo, g_lo, side = cand, f_c - 1.0, -1
    return y_lo, y_hi


def solve_weights(
    means,
    sigma2: float,
    *,
    method: str = "bisect",
    warm_y: float | None = None,
    warm_xs: np.ndarray | None = None,
    atol: float = 1e-10,
) -> WeightSolution:
    """Oracle weights maximizing the worst-case pairwise GLR drift rate.

    Solves sum_i [y f_x_i'(y) - f_x_i(y)] = 1 for the unique y* in
    (0, min_i d_hg(mu_best, mu_i)), then returns
    w_best = 1 / (1 + sum_i x_i*), w_i = x_i* w_best with x_i* = f_x_i(y*),
    and the attained sup-inf objective y* w_best.

    method="bisect" is the reference path (bracketing bisection, central
    finite differences on f_x, Richardson fallback). method="fast" solves
    the same equation with safeguarded Newton/secant iterations and is used
    inside algorithm loops; both agree to solver tolerance.

    Raises ValueError on fewer than two arms or a tied best mean, and
    RuntimeError if the bracket shows no sign change (a precondition
    violation, reported rather than patched).
    """
    mu = np.asarray(means, dtype=float)
    if mu.size < 2:
        raise ValueError("need at least two arms")
    if np.any(mu <= 0):
        raise ValueError("means must be strictly positive")
    best = int(np.argmax(mu))
    if np.sum(mu == mu[best]) > 1:
        raise ValueError("tied best mean: oracle weights are undefined")

    rivals = np.arange(mu.size) != best
    r = mu[rivals] / mu[best]
    s = sigma2 / mu[best]
    y_max = d_hg(1.0, r, s)
    # the top of the bracket stays 1e-5 below the pole: F is already
    # astronomically above 1 there, and the inversions remain well
    # conditioned for the finite differences
    y_hi = float(np.min(y_max)) * (1.0 - 1e-5)

    if method == "bisect":
        fn = lambda y, richardson=False: _stationarity_spec(y, r, s, y_max, richardson)
        y_lo, f_lo = _bracket_low(fn, y_hi)
        f_hi, _ = fn(y_hi)
        if not f_hi > 1.0:
            raise RuntimeError(
                "stationarity equation has no sign change on the bracket; "
                "the instance likely violates the solver's preconditions"
            )
        y_lo, y_hi = _solve_y_bisect(fn, y_lo, y_hi, f_lo, f_hi, atol)
    elif method == "fast":
        # identical rival ratios (common under the count-aware mean floor)
        # share one inversion; multiplicities enter the stationarity sum,
        # which is exact because identical rivals carry identical ratios
        r_u, first, inverse, mult = np.unique(
            r, return_index=True, return_inverse=True, return_counts=True
        )
        y_max_u = d_hg(1.0, r_u, s)
        fn = _FastStationarity(r_u, s, y_max_u, mult=mult.astype(float))
        if warm_xs is not None and warm_y is not None and warm_xs.shape == r.shape:
            fn._xs, fn._last_y = warm_xs[first], warm_y
        # endpoint values are the limit priors: F -> 0 below, +inf at the pole
        y_lo0, y_hi0 = y_hi * 1e-12, y_hi
        y_lo, y_hi = _solve_y_fast(fn, y_lo0, y_hi0, 0.0, float("inf"), atol, warm=warm_y)
        if y_hi <= 2.0 * y_lo0 or y_lo >= y_hi0 * (1.0 - 1e-9):
            raise RuntimeError(
                "stationarity equation has no interior root on the bracket; "
                "the instance likely violates the solver's preconditions"
            )
    else:
        raise ValueError(f"unknown method {method!r}")

    if method == "fast":
        # the last stationarity evaluation already solved the inversions at
        # a point inside the final (atol-wide) bracket; reuse it
        if fn._last_y is not None and y_lo <= fn._last_y <= y_hi:
            y_star = fn._last_y
            xs = fn._xs[inverse]
        else:
            y_star = 0.5 * (y_lo + y_hi)
            warm = (fn._xs, 0.1) if fn._xs is not None else None
            xs = _fx_illinois(y_star, fn.fy, r_u, s, y_max_u, x_warm=warm)[inverse]
    else:
        y_star = 0.5 * (y_lo + y_hi)
        xs = _fx_bisect(y_star, r, s)
    w_best = 1.0 / (1.0 + float(np.sum(xs)))
    weights = np.empty(mu.size)
    weights[best] = w_best
    weights[rivals] = xs * w_best
    weights /= weights.sum()
    return WeightSolution(weights=weights, y_star=float(y_star), objective=float(y_star * w_best))


def solve_weights_quadratic(
    means, variance: float, *, method: str = "fast", warm_y: float | None = None
) -> WeightSolution:
    """Oracle weights for plain Gaussian arms with a common plug-in variance.

    Same stationarity machinery specialized to quadratic divergences
    d_i = (mu_best - mu_i)^2 / (2 V), where f_x has the closed form
    y / (d_i - y) and the equation reduces to sum_i y^2/(d_i - y)^2 = 1.
    """
    mu = np.asarray(means, dtype=float)
    if mu.size < 2:
        raise ValueError("need at least two arms")
    if variance <= 0:
        raise ValueError("variance must be positive")
    best = int(np.argmax(mu))
    if np.sum(mu == mu[best]) > 1:
        raise ValueError("tied best mean: oracle weights are undefined")
    rivals = np.arange(mu.size) != best
    d = (mu[best] - mu[rivals]) ** 2 / (2.0 * variance)
    y_hi = float(np.min(d)) * (1.0 - 1e-12)

    def fn(y):
        return float(np.sum(y * y / (d - y) ** 2)), None

    y_lo = y_hi * 1e-12
    atol = 1e-12 * y_hi
    if method == "bisect":
        f_lo, _ = fn(y_lo)
        f_hi, _ = fn(y_hi)
        while (y_hi - y_lo) > max(atol, 8 * np.finfo(float).eps * y_hi):
            mid = 0.5 * (y_lo + y_hi)
            if mid <= y_lo or mid >= y_hi:
                break
            f_mid, _ = fn(mid)
            if f_mid < 1.0:
                y_lo, f_lo = mid, f_mid
            else:
                y_hi, f_hi = mid, f_mid
    else:
        y_lo, y_hi = _solve_y_fast(fn, y_lo, y_hi, 0.0, float("inf"), atol, warm=warm_y)
    y_star = 0.5 * (y_lo + y_hi)
    xs = y_star / (d - y_star)
    w_best = 1.0 / (1.0 + float(np.sum(xs)))
    weights = np.empty(mu.size)
    weights[best] = w_best
    weights[rivals] = xs * w_best
    weights /= weights.sum()
    return WeightSolution(weights=weights, y_star=float(y_star), objective=float(y_star * w_best))


# ---------------------------------------------------------------------------
# bound calculators
# ---------------------------------------------------------------------------


def lower_bound(inst: BanditInstance, delta: float) -> float:
    """Instance-dependent lower bound on the expected stopping time.

    Returns c*(nu) * ln(1/(4 delta)) where 1/c*(nu) is the solver's sup-inf
    objective. Zero (or negative, trivially) when delta >= 1/4.
    """
    sol = solve_weights(inst.means, inst.noise_var)
    return float(np.log(1.0 / (4.0 * delta)) / sol.objective)


def c_star_u(means, sigma2: float) -> float:
    """Closed-form upper-bound constant on the characteristic time.

    Evaluates the two-arm surrogate at the best arm and the largest rival.
    Returns inf when the bracket is nonpositive (the bound is vacuous at
    large noise), never a negative constant.
    """
    mu = np.asarray(means, dtype=float)
    if mu.size < 2:
        raise ValueError("need at least two arms")
    order = np.argsort(mu)[::-1]
    mu_b, mu_r = mu[order[0]], mu[order[1]]
    total = float(np.sum(mu))
    bracket = (
        mu_b / (2.0 * total) * np.log(2.0 * mu_b / (mu_b + mu_r))
        + mu_r / (2.0 * total) * np.log(2.0 * mu_r / (mu_b + mu_r))
        + (mu_b - mu_r) ** 2 / (8.0 * sigma2 * total)
        - (mu_b + mu_r) / (2.0 * total)
    )
    if bracket <= 0:
        return float("inf")
    return float(1.0 / bracket)


def t_star_u(means, sigma2: float) -> float:
    """Characteristic-time constant of the plug-in track-and-stop baseline.

    8 mu_best sigma2 / gap_min^2 plus the same term summed over every
    suboptimal arm's gap.
    """
    mu = np.asarray(means, dtype=float)
    if mu.size < 2:
        raise ValueError("need at least two arms")
    best = int(np.argmax(mu))
    gaps = mu[best] - np.delete(mu, best)
    if np.any(gaps <= 0):
        raise ValueError("best mean must be unique")
    lead = 8.0 * mu[best] * sigma2
    return float(lead / gaps.min() ** 2 + np.sum(lead / gaps**2))


def threshold_series_partial_sum(
    alpha: float, delta: float, num_arms: int, n_terms: int = 100_000
) -> float:
    """Partial sum of the risk-control series for the threshold constant alpha.

    Diagnostic only: the full series grows without bound for any alpha, so
    this reports the partial sum at a finite horizon for comparison against
    alpha. Computed in log space to survive large arm counts.
    """
    from scipy.special import logsumexp

    t = np.arange(1, n_terms + 1, dtype=float)
    inner = np.log(alpha * t / delta) ** 2 * np.log(t)
    with np.errstate(divide="ignore"):
        log_terms = (
            (num_arms + 1.0)
            - np.log(t)
            - num_arms * np.log(num_arms)
            + num_arms * np.where(inner > 0, np.log(inner), -np.inf)
        )
    return float(np.exp(logsumexp(log_terms)))


# ---------------------------------------------------------------------------
# divergence families used by the algorithm engines
# ---------------------------------------------------------------------------


class HeteroscedasticGlr:
    """GLR + oracle weights for variance-proportional-to-mean arms."""

    def __init__(self, sigma2: float):
        if sigma2 <= 0:
            raise ValueError("sigma2 must be positive")
        self.sigma2 = sigma2
        self._warm_y: float | None = None
        self._warm_xs: np.ndarray | None = None
        self._warm_best: int | None = None

    def glr(self, state: TrackingState) -> tuple[float, int]:
        return glr_statistic(state, self.sigma2)

    def weights(self, state: TrackingState) -> np.ndarray:
        """Oracle weights at the clamped empirical means; uniform on ties."""
        mu = clamp_positive(state.emp_means, self.sigma2, state.counts)
        best = int(np.argmax(mu))
        warm_y, warm_xs = (
            (self._warm_y, self._warm_xs) if self._warm_best == best else (None, None)
        )
        try:
            sol = solve_weights(
                mu, self.sigma2, method="fast", warm_y=warm_y, warm_xs=warm_xs,
                atol=1e-8,
            )
        except (ValueError, RuntimeError):
            return np.full(state.num_arms, 1.0 / state.num_arms)
        self._warm_y = sol.y_star
        self._warm_xs = np.delete(sol.weights, best) / sol.weights[best]
        self._warm_best = best
        return sol.weights


class PlugInGaussianGlr:
    """GLR + weights for the baseline that ignores heteroscedasticity.

    Uses the plain Gaussian divergence (mu_i - mu_j)^2 / (2 V) with the
    plug-in common variance V(t) = 2 sigma2 max_k mu_hat_k(t).
    """

    def __init__(self, sigma2: float):
        if sigma2 <= 0:
            raise ValueError("sigma2 must be positive")
        self.sigma2 = sigma2
        self._warm_yv: float | None = None  # y* scaled by V, stable across steps

    def _variance(self, state: TrackingState) -> float:
        top = float(np.max(state.emp_means))
        scale = top if top > 0 else _CLAMP_REL * self.sigma2
        return 2.0 * self.sigma2 * scale

    def glr(self, state: TrackingState) -> tuple[float, int]:
        return glr_statistic_quadratic(state, self._variance(state))

    def weights(self, state: TrackingState) -> np.ndarray:
        variance = self._variance(state)
        warm = self._warm_yv / variance if self._warm_yv is not None else None
        try:
            sol = solve_weights_quadratic(state.emp_means, variance, warm_y=warm)
        except ValueError:
            return np.full(state.num_arms, 1.0 / state.num_arms)
        self._warm_yv = sol.y_star * variance
        return sol.weights
