import numpy as np
import pytest

from beamalign.bandit import BanditInstance, TrackingState, d_hg, noise_condition_thresholds
from beamalign.glr import (
    GlrConfig,
    HeteroscedasticGlr,
    PlugInGaussianGlr,
    c_star_u,
    clamp_positive,
    f_x,
    f_y,
    glr_statistic,
    glr_statistic_quadratic,
    lower_bound,
    pooled_mean,
    solve_weights,
    solve_weights_quadratic,
    t_star_u,
    threshold,
    threshold_series_partial_sum,
)


def inner_value(w_b, w_i, mu_b, mu_i, sigma2):
    """Pairwise objective at weights (w_b, w_i), written from first principles."""
    q = (w_b + w_i) * mu_b * mu_i / (w_b * mu_i + w_i * mu_b)
    return w_b * d_hg(mu_b, q, sigma2) + w_i * d_hg(mu_i, q, sigma2)


def grid_sup_inf(means, sigma2, step):
    """Brute-force sup over the weight simplex of the min-rival inner value."""
    mu = np.asarray(means, float)
    best = int(np.argmax(mu))
    rivals = [i for i in range(mu.size) if i != best]
    if len(rivals) == 1:
        w1 = np.arange(step, 1.0, step)
        vals = np.array(
            [inner_value(w, 1.0 - w, mu[best], mu[rivals[0]], sigma2) for w in w1]
        )
        j = int(np.argmax(vals))
        return float(vals[j]), np.array([w1[j], 1.0 - w1[j]])
    assert len(rivals) == 2
    w2 = np.arange(step, 1.0, step)
    w3 = np.arange(step, 1.0, step)
    W2, W3 = np.meshgrid(w2, w3, indexing="ij")
    WB = 1.0 - W2 - W3
    ok = WB > 0
    q2 = (WB + W2) * mu[best] * mu[rivals[0]] / (WB * mu[rivals[0]] + W2 * mu[best])
    q3 = (WB + W3) * mu[best] * mu[rivals[1]] / (WB * mu[rivals[1]] + W3 * mu[best])
    v2 = WB * d_hg(mu[best], q2, sigma2) + W2 * d_hg(mu[rivals[0]], q2, sigma2)
    v3 = WB * d_hg(mu[best], q3, sigma2) + W3 * d_hg(mu[rivals[1]], q3, sigma2)
    vals = np.where(ok, np.minimum(v2, v3), -np.inf)
    j = np.unravel_index(np.argmax(vals), vals.shape)
    return float(vals[j]), np.array([WB[j], W2[j], W3[j]])


class TestThreshold:
    def test_zero_at_unit_arguments(self):
        assert threshold(1, GlrConfig(delta=1 - 1e-12, alpha=1.0)) == pytest.approx(0.0, abs=1e-9)

    def test_hand_value(self):
        assert threshold(100, GlrConfig(delta=0.05, alpha=1.0)) == pytest.approx(
            np.log(2000.0), rel=1e-12
        )

    def test_monotone_in_t(self):
        cfg = GlrConfig(delta=0.1)
        vals = [threshold(t, cfg) for t in range(1, 50)]
        assert np.all(np.diff(vals) > 0)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            GlrConfig(delta=0.0)
        with pytest.raises(ValueError):
            GlrConfig(delta=0.1, alpha=0.5)


class TestPooledMean:
    def test_equal_counts_harmonic_mean(self):
        assert pooled_mean(2.0, 1.0, 5, 5) == pytest.approx(4.0 / 3.0, rel=1e-14)

    def test_fixed_point(self):
        assert pooled_mean(1.3, 1.3, 7, 2) == pytest.approx(1.3, rel=1e-14)

    def test_hand_value_and_grid_minimizer(self):
        q = pooled_mean(2.0, 1.0, 3, 1)
        assert q == pytest.approx(1.6, rel=1e-14)
        # q minimizes 3*d(x, 2) + 1*d(x, 1) over the common mean x, for any
        # noise level (the objective with the candidate in the first slot)
        for s2 in (0.05, 0.5, 7.0):
            xs = np.arange(0.5, 3.0, 1e-4)
            obj = 3 * d_hg(xs, 2.0, s2) + 1 * d_hg(xs, 1.0, s2)
            assert xs[np.argmin(obj)] == pytest.approx(1.6, abs=2e-4)

    def test_lies_strictly_between(self):
        rng = np.random.default_rng(9)
        for _ in range(200):
            mu_b = 10 ** rng.uniform(-2, 2)
            mu_i = mu_b * rng.uniform(0.05, 0.999)
            t_b, t_i = rng.integers(1, 500, size=2)
            q = pooled_mean(mu_b, mu_i, t_b, t_i)
            assert mu_i < q < mu_b

    def test_exact_minimizer_against_grid(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            mu_b = 10 ** rng.uniform(-1, 1)
            mu_i = mu_b * rng.uniform(0.1, 0.95)
            t_b, t_i = rng.integers(1, 50, size=2)
            s2 = 10 ** rng.uniform(-1, 1)
            q = pooled_mean(mu_b, mu_i, t_b, t_i)
            xs = np.linspace(mu_i, mu_b, 4001)
            obj = t_b * d_hg(xs, mu_b, s2) + t_i * d_hg(xs, mu_i, s2)
            obj_at_q = t_b * d_hg(q, mu_b, s2) + t_i * d_hg(q, mu_i, s2)
            assert obj_at_q <= obj.min() + 1e-9 * (1 + abs(obj.min()))


class TestGlrStatistic:
    def make_state(self, means, counts):
        st = TrackingState(len(means))
        for arm, (m, c) in enumerate(zip(means, counts)):
            for _ in range(c):
                st.record(arm, m)
        return st

    def test_all_equal_means_give_zero(self):
        st = self.make_state([1.5, 1.5, 1.5], [2, 3, 4])
        z, _ = glr_statistic(st, 0.5)
        assert z == pytest.approx(0.0, abs=1e-12)

    def test_frozen_two_arm_value(self):
        # Z at mu_hat = (2, 1), counts (1, 1), sigma2 = 0.5 equals
        # d(2, 4/3) + d(1, 4/3); the terms are hand-evaluated below
        st = self.make_state([2.0, 1.0], [1, 1])
        z, rival = glr_statistic(st, 0.5)
        term_best = 0.5 * np.log(2.0 / 3.0) + 0.75 + (2.0 / 3.0) ** 2 / (8.0 / 3.0) - 0.5
        term_rival = 0.5 * np.log(4.0 / 3.0) + 0.375 + (1.0 / 3.0) ** 2 / (8.0 / 3.0) - 0.5
        assert z == pytest.approx(term_best + term_rival, rel=1e-12)
        assert z == pytest.approx(0.27444181550514146, rel=1e-10)
        assert rival == 1

    def test_count_scaling_is_linear(self):
        st1 = self.make_state([2.0, 1.0, 0.7], [2, 3, 4])
        st3 = self.make_state([2.0, 1.0, 0.7], [6, 9, 12])
        z1, r1 = glr_statistic(st1, 0.4)
        z3, r3 = glr_statistic(st3, 0.4)
        assert z3 == pytest.approx(3.0 * z1, rel=1e-12)
        assert r1 == r3

    def test_permutation_equivariance(self):
        means = [0.9, 2.0, 0.4, 1.4]
        counts = [3, 2, 5, 4]
        st = self.make_state(means, counts)
        z, rival = glr_statistic(st, 0.3)
        perm = [2, 0, 3, 1]
        st_p = self.make_state([means[i] for i in perm], [counts[i] for i in perm])
        z_p, rival_p = glr_statistic(st_p, 0.3)
        assert z_p == pytest.approx(z, rel=1e-12)
        assert perm[rival_p] == rival

    def test_requires_all_arms_pulled(self):
        st = TrackingState(2)
        st.record(0, 1.0)
        with pytest.raises(ValueError):
            glr_statistic(st, 0.5)

    def test_quadratic_variant_closed_form(self):
        st = self.make_state([2.0, 1.0], [3, 1])
        variance = 0.8
        z, rival = glr_statistic_quadratic(st, variance)
        # harmonic-count two-sample statistic
        assert z == pytest.approx((3 * 1 / 4) * 1.0 / (2 * variance), rel=1e-12)
        assert rival == 1


class TestFyFx:
    def test_fy_at_zero(self):
        assert f_y(0.0, 2.0, 1.0, 0.5) == 0.0

    def test_fy_limit_is_divergence(self):
        lim = d_hg(2.0, 1.0, 0.5)
        assert abs(f_y(1e6, 2.0, 1.0, 0.5) - lim) < 1e-4

    def test_fy_value_at_one_is_harmonic_pair(self):
        got = f_y(1.0, 2.0, 1.0, 0.5)
        want = d_hg(2.0, 4.0 / 3.0, 0.5) + d_hg(1.0, 4.0 / 3.0, 0.5)
        assert got == pytest.approx(want, rel=1e-12)

    def test_fy_strictly_increasing(self):
        xs = np.logspace(-4, 5, 300)
        for mu_i, s2 in [(1.0, 0.5), (0.2, 2.0), (1.9, 1e-3), (0.05, 1e-6)]:
            vals = np.array([f_y(x, 2.0, mu_i, s2) for x in xs])
            assert np.all(np.diff(vals) > 0), (mu_i, s2)

    def test_fx_inverse_round_trip(self):
        y_max = d_hg(2.0, 1.0, 0.5)
        for y in np.linspace(1e-6, 0.999, 100) * y_max:
            x = f_x(y, 2.0, 1.0, 0.5)
            assert f_y(x, 2.0, 1.0, 0.5) == pytest.approx(y, abs=1e-9)

    def test_fx_at_zero_and_monotone(self):
        assert f_x(0.0, 2.0, 1.0, 0.5) == 0.0
        ys = np.linspace(1e-4, 0.99, 40) * d_hg(2.0, 1.0, 0.5)
        xs = [f_x(y, 2.0, 1.0, 0.5) for y in ys]
        assert np.all(np.diff(xs) > 0)

    def test_fx_domain_error(self):
        y_max = d_hg(2.0, 1.0, 0.5)
        with pytest.raises(ValueError):
            f_x(y_max, 2.0, 1.0, 0.5)
        with pytest.raises(ValueError):
            f_x(-0.1, 2.0, 1.0, 0.5)

    def test_argument_validation(self):
        with pytest.raises(ValueError):
            f_y(1.0, 1.0, 2.0, 0.5)  # needs mu_best > mu_i


class TestSolveWeights:
    def test_two_arm_against_grid(self):
        sol = solve_weights([2.0, 1.0], 0.5)
        obj_grid, w_grid = grid_sup_inf([2.0, 1.0], 0.5, step=0.001)
        assert abs(sol.weights[0] - w_grid[0]) < 0.005
        assert sol.objective == pytest.approx(obj_grid, rel=1e-4)

    def test_three_arm_against_grid(self):
        sol = solve_weights([3.0, 2.0, 1.0], 1.0)
        obj_grid, _ = grid_sup_inf([3.0, 2.0, 1.0], 1.0, step=0.002)
        assert sol.objective == pytest.approx(obj_grid, rel=1e-3)

    def test_symmetric_rivals_get_identical_weights(self):
        sol = solve_weights([2.0, 1.0, 1.0], 1.0)
        assert sol.weights[1] == sol.weights[2]

    def test_weights_simplex_and_positive(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            size = rng.integers(2, 8)
            mu = np.sort(10 ** rng.uniform(-1, 1, size=size))[::-1]
            mu[0] *= 1.05
            sol = solve_weights(mu, 10 ** rng.uniform(-2, 1))
            assert sol.weights.sum() == pytest.approx(1.0, abs=1e-9)
            assert np.all(sol.weights > 0)
            assert 0 < sol.y_star < d_hg(mu[0], mu[1], 1.0) * 1e9  # finite, positive

    def test_fast_matches_reference_method(self):
        rng = np.random.default_rng(12)
        for _ in range(15):
            size = rng.integers(2, 10)
            mu = 10 ** rng.uniform(-1, 1, size=size)
            mu[rng.integers(0, size)] = mu.max() * 1.3
            s2 = 10 ** rng.uniform(-3, 1)
            ref = solve_weights(mu, s2)
            fast = solve_weights(mu, s2, method="fast")
            assert np.max(np.abs(ref.weights - fast.weights)) < 1e-7
            assert fast.objective == pytest.approx(ref.objective, rel=1e-7)

    def test_rejects_tie_and_small_instances(self):
        with pytest.raises(ValueError):
            solve_weights([1.0, 1.0], 0.5)
        with pytest.raises(ValueError):
            solve_weights([1.0], 0.5)

    def test_stationarity_map_nondecreasing_near_root(self):
        # scan the stationarity map on an instance satisfying the
        # large-noise condition: nondecreasing through the F = 1 band
        from beamalign.glr import _stationarity_spec

        mu = np.array([2.0, 1.6, 1.2])
        thr, _ = noise_condition_thresholds(mu)
        s2 = 1.2 * np.nanmax(thr)
        r = mu[1:] / mu[0]
        s = s2 / mu[0]
        y_max = d_hg(1.0, r, s)
        ys = np.linspace(1e-4, 0.9999, 80) * y_max.min()
        vals = np.array([_stationarity_spec(y, r, s, y_max)[0] for y in ys])
        band = (vals > 0.25) & (vals < 4.0)
        assert np.all(np.diff(vals[band]) > -1e-6)


class TestQuadraticSolver:
    def test_two_arm_is_half_half(self):
        sol = solve_weights_quadratic([2.0, 1.0], 0.7)
        assert np.allclose(sol.weights, [0.5, 0.5], atol=1e-9)

    def test_matches_direct_equation(self):
        # root of sum_i y^2/(d_i - y)^2 = 1 recovered to high accuracy
        mu = np.array([3.0, 2.0, 1.0])
        V = 0.9
        sol = solve_weights_quadratic(mu, V)
        d = (mu[0] - mu[1:]) ** 2 / (2 * V)
        lhs = np.sum(sol.y_star**2 / (d - sol.y_star) ** 2)
        assert lhs == pytest.approx(1.0, abs=1e-6)

    def test_bisect_method_agrees(self):
        a = solve_weights_quadratic([3.0, 2.0, 1.0], 0.9)
        b = solve_weights_quadratic([3.0, 2.0, 1.0], 0.9, method="bisect")
        assert np.max(np.abs(a.weights - b.weights)) < 1e-9


class TestBounds:
    def test_lower_bound_zero_at_quarter(self):
        inst = BanditInstance(means=np.array([2.0, 1.0]), noise_var=0.5)
        assert lower_bound(inst, 0.25) == pytest.approx(0.0, abs=1e-9)

    def test_lower_bound_log_law(self):
        inst = BanditInstance(means=np.array([2.0, 1.0]), noise_var=0.5)
        delta = 0.1
        diff = lower_bound(inst, delta / np.e) - lower_bound(inst, delta)
        c_star = 1.0 / solve_weights(inst.means, inst.noise_var).objective
        assert diff == pytest.approx(c_star, rel=1e-9)

    def test_lower_bound_value_from_grid_verified_solver(self):
        inst = BanditInstance(means=np.array([2.0, 1.0]), noise_var=0.5)
        obj_grid, _ = grid_sup_inf([2.0, 1.0], 0.5, step=0.001)
        got = lower_bound(inst, 0.1)
        assert got == pytest.approx(np.log(2.5) / obj_grid, rel=1e-3)

    def test_c_star_u_association_order(self):
        mu = [2.0, 1.0, 0.6]
        s2 = 0.01
        got = c_star_u(mu, s2)
        # independent evaluation with a different association order
        total = (0.6 + 1.0) + 2.0
        mu_b, mu_r = 2.0, 1.0
        bracket = (
            (mu_b * np.log(2 * mu_b / (mu_b + mu_r)) + mu_r * np.log(2 * mu_r / (mu_b + mu_r)))
            / (2 * total)
            + ((mu_b - mu_r) / np.sqrt(8 * s2 * total)) ** 2
            - (mu_b + mu_r) / (2 * total)
        )
        assert got == pytest.approx(1.0 / bracket, rel=1e-12)

    def test_c_star_u_scale_invariance(self):
        assert c_star_u([2.0, 1.0, 0.5], 0.02) == pytest.approx(
            c_star_u([20.0, 10.0, 5.0], 0.2), rel=1e-12
        )

    def test_c_star_u_vacuous_at_large_noise(self):
        assert c_star_u([2.0, 1.0], 10.0) == np.inf

    def test_c_star_u_upper_bounds_solver_when_finite(self):
        # whenever the closed form is non-vacuous it dominates the
        # characteristic time from the solver
        mu = [2.0, 1.0, 0.9, 0.8]
        s2 = 0.005
        cu = c_star_u(mu, s2)
        assert np.isfinite(cu)
        c_star = 1.0 / solve_weights(mu, s2).objective
        assert c_star <= cu * (1 + 1e-9)

    def test_t_star_u_hand_value(self):
        assert t_star_u([2.0, 1.0], 0.5) == pytest.approx(16.0, rel=1e-12)

    def test_t_star_u_linear_in_noise(self):
        assert t_star_u([2.0, 1.0, 0.5], 0.8) == pytest.approx(
            2.0 * t_star_u([2.0, 1.0, 0.5], 0.4), rel=1e-12
        )

    def test_t_star_u_far_arm_negligible(self):
        # the 1/gap^2 term of a far-inferior arm vanishes next to the
        # dominant close-pair terms
        base = t_star_u([2.0, 1.99], 0.5)
        with_far = t_star_u([2.0, 1.99, 1e-4], 0.5)
        assert with_far == pytest.approx(base, rel=0.01)

    def test_threshold_series_partial_sum_grows(self):
        a = threshold_series_partial_sum(1.0, 0.1, 3, n_terms=1000)
        b = threshold_series_partial_sum(1.0, 0.1, 3, n_terms=10_000)
        assert b > a > 0


class TestClampAndFamilies:
    def test_clamp_substitutes_only_nonpositive(self):
        from beamalign.glr import _FLOOR_SCALE

        means = np.array([-0.5, 2.0, 0.0, 0.3])
        counts = np.array([4, 1, 1, 2])
        out = clamp_positive(means, 1.0, counts)
        assert out[0] == pytest.approx(_FLOOR_SCALE / 4)  # nonpositive -> scale*sigma2/T
        assert out[1] == 2.0                              # positive untouched
        assert out[2] == pytest.approx(_FLOOR_SCALE)
        assert out[3] == 0.3

    def test_clamp_all_nonpositive(self):
        from beamalign.glr import _FLOOR_SCALE

        means = np.array([-1.0, -2.0])
        out = clamp_positive(means, 2.0, np.array([1, 1]))
        assert np.all(out == 2.0 * _FLOOR_SCALE)  # both substituted

    def test_het_family_uniform_fallback_on_ties(self):
        fam = HeteroscedasticGlr(1.0)
        st = TrackingState(3)
        for arm in range(3):
            st.record(arm, 1.0)  # exact tie at the top
        w = fam.weights(st)
        assert np.allclose(w, 1.0 / 3.0)

    def test_plugin_family_variance_tracks_best_mean(self):
        fam = PlugInGaussianGlr(0.25)
        st = TrackingState(2)
        st.record(0, 4.0)
        st.record(1, 1.0)
        z, _ = fam.glr(st)
        assert z == pytest.approx((1 * 1 / 2) * 9.0 / (2 * 2 * 0.25 * 4.0), rel=1e-12)
