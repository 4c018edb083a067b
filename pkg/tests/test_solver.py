import numpy as np
import pytest

from graphftrl.entropy import ConstantSchedule, RegularizerParams, tsallis_shannon_grad, log_barrier_grad
from graphftrl.errors import InfeasibleError, NonConvergenceError, SizeLimitError
from graphftrl.graph import CliqueCover
from graphftrl.learner import default_params
from graphftrl.solver import (DEFAULT_TOL, brute_force_solve, feasible_start, ftrl_objective, ftrl_solve)

from oracles import random_partition


def kkt_residual(p, cum_loss, cover, params, t):
    """Max-norm KKT residual computed from the entropy-module gradients."""
    g = cum_loss + tsallis_shannon_grad(p, cover, params.alpha) / params.eta(t) + log_barrier_grad(p, cover, params.beta)
    free = p > params.gamma * (1 + 1e-9)
    nu = -(g[free].max() + g[free].min()) / 2
    stationarity = np.abs(g[free] + nu).max()
    # pinned arms need a nonnegative multiplier g_i + nu
    pinned = np.maximum(-(g[~free] + nu), 0.0)
    return max(stationarity, pinned.max(initial=0.0))


class TestBasics:
    @pytest.mark.parametrize("cliques", [[[0], [1], [2], [3]], [[0, 1], [2, 3]], [[0, 1, 2, 3]], [[0, 2, 4], [1, 3, 5]]])
    def test_zero_loss_uniform(self, cliques):
        n = sum(len(c) for c in cliques)
        cover = CliqueCover.from_cliques(cliques, n)
        rep = ftrl_solve(np.zeros(n), cover, default_params(n, 100), 1)
        np.testing.assert_allclose(rep.solution, 1 / n, atol=1e-12)
        assert rep.converged and rep.kkt_residual <= DEFAULT_TOL

    def test_pinned_coordinate(self):
        # gradient of the second coordinate at the floor is 100 + 1.005 - 10 + 0.505 - 50 > 0
        params = RegularizerParams(alpha=2.0, beta=0.5, gamma=0.01)
        rep = ftrl_solve(np.array([0.0, 100.0]), CliqueCover.singletons(2), params, 1)
        np.testing.assert_allclose(rep.solution, [0.99, 0.01], atol=1e-12)
        # 1-d scan over the free coordinate agrees
        xs = np.linspace(0.01, 0.99, 98001)
        vals = [ftrl_objective(np.array([1 - x, x]), [0.0, 100.0], CliqueCover.singletons(2), params, 1) for x in xs]
        assert xs[int(np.argmin(vals))] == pytest.approx(0.01, abs=1e-9)

    def test_pinned_example_with_default_alpha_is_interior(self):
        # with alpha = 2(log^2(NT)+1) for NT = 100 the large shift keeps the second arm off the floor
        params = default_params(2, 50)
        assert params.gamma == pytest.approx(0.01)
        rep = ftrl_solve(np.array([0.0, 100.0]), CliqueCover.singletons(2), params, 1)
        assert rep.solution[1] > 0.1
        np.testing.assert_allclose(rep.solution, brute_force_solve([0.0, 100.0], CliqueCover.singletons(2), params, 1),
                                   atol=1e-6)

    def test_infeasible(self):
        with pytest.raises(InfeasibleError):
            ftrl_solve(np.zeros(3), CliqueCover.singletons(3), RegularizerParams(1.0, 1.0, 0.5), 1)

    def test_gamma_one_over_n(self):
        rep = ftrl_solve(np.array([0.0, 5.0, 9.0]), CliqueCover.singletons(3), RegularizerParams(1.0, 1.0, 1 / 3), 1)
        np.testing.assert_allclose(rep.solution, 1 / 3)

    def test_shift_invariance(self, rng):
        cover = CliqueCover.from_cliques([[0, 1], [2, 3, 4]])
        params = default_params(5, 1000)
        L = rng.uniform(0, 50, 5)
        a = ftrl_solve(L, cover, params, 30).solution
        b = ftrl_solve(L + 1e4, cover, params, 30).solution
        np.testing.assert_allclose(a, b, atol=1e-10)

    def test_nonconvergence_carries_residual(self):
        cover = CliqueCover.from_cliques([[0, 1], [2, 3]])
        with pytest.raises(NonConvergenceError) as info:
            ftrl_solve(np.array([0.0, 3e3, 10.0, 7e3]), cover, RegularizerParams(1.0, 1.0, 1e-6), 1, max_iter=1)
        assert info.value.residual > DEFAULT_TOL
        assert info.value.iterations == 1


class TestAgainstOracle:
    @pytest.mark.parametrize("seed", range(12))
    def test_random_n3(self, seed):
        rng = np.random.default_rng(seed)
        cover = CliqueCover.from_cliques(random_partition(rng, 3), 3)
        params = RegularizerParams(alpha=float(rng.uniform(0.5, 30)), beta=float(rng.uniform(0, 9)),
                                   gamma=float(rng.choice([1e-4, 1e-2])))
        t = int(rng.choice([1, 10, 1000]))
        L = rng.uniform(0, 10 ** rng.uniform(0, 4), 3)
        rep = ftrl_solve(L, cover, params, t)
        ref = brute_force_solve(L, cover, params, t)
        assert np.abs(rep.solution - ref).max() <= 1e-6
        assert kkt_residual(rep.solution, L - L.min(), cover, params, t) <= 1e-8

    def test_n4_two_cliques(self, rng):
        cover = CliqueCover.from_cliques([[0, 1], [2, 3]])
        params = RegularizerParams(alpha=4.0, beta=9.0, gamma=1e-3)
        L = np.array([3.0, 7.0, 0.0, 20.0])
        np.testing.assert_allclose(ftrl_solve(L, cover, params, 5).solution,
                                   brute_force_solve(L, cover, params, 5), atol=1e-6)


class TestOracle:
    def test_size_limit(self):
        with pytest.raises(SizeLimitError):
            brute_force_solve(np.zeros(5), CliqueCover.singletons(5), RegularizerParams(1, 1, 0.01), 1)

    def test_zero_loss_uniform(self):
        p = brute_force_solve(np.zeros(3), CliqueCover.singletons(3), RegularizerParams(1, 1, 0.01), 1)
        np.testing.assert_allclose(p, 1 / 3, atol=1e-7)

    def test_not_worse_than_grid(self, rng):
        cover = CliqueCover.from_cliques([[0, 1], [2]])
        params = RegularizerParams(alpha=3.0, beta=1.0, gamma=0.01)
        L = np.array([5.0, 0.0, 2.0])
        best = ftrl_objective(brute_force_solve(L, cover, params, 4), L, cover, params, 4)
        ticks = np.arange(0.01, 0.98, 0.01)
        for a in ticks:
            for b in ticks:
                if 1 - a - b >= 0.01:
                    assert best <= ftrl_objective(np.array([a, b, 1 - a - b]), L, cover, params, 4) + 1e-12


class TestProperties:
    def setup_method(self):
        self.cover = CliqueCover.from_cliques([[0, 3], [1, 4, 5], [2]])
        self.params = default_params(6, 10_000)

    def test_warm_start_equivalence(self, rng):
        for _ in range(20):
            L = rng.uniform(0, 300, 6)
            t = int(rng.integers(1, 10_000))
            cold = ftrl_solve(L, self.cover, self.params, t).solution
            warm = ftrl_solve(L, self.cover, self.params, t, warm_start=rng.dirichlet(np.ones(6))).solution
            np.testing.assert_allclose(cold, warm, atol=1e-8)

    def test_feasibility_and_certificate(self, rng):
        gamma = self.params.gamma
        for _ in range(20):
            L = rng.uniform(0, 10 ** rng.uniform(0, 5), 6)
            t = int(rng.integers(1, 10_000))
            p = ftrl_solve(L, self.cover, self.params, t).solution
            assert p.min() >= gamma - 1e-12 and abs(p.sum() - 1) <= 1e-12
            f0 = ftrl_objective(p, L, self.cover, self.params, t)
            for _ in range(100):
                d = rng.normal(size=6)
                d -= d.mean()
                q = feasible_start(p + 1e-4 * d * p, gamma)
                assert f0 <= ftrl_objective(q, L, self.cover, self.params, t) + 1e-9 * max(1, abs(f0))

    def test_monotone_response(self, rng):
        L = rng.uniform(0, 100, 6)
        prev = 1.0
        for bump in np.linspace(0, 500, 26):
            x = L.copy()
            x[4] += bump
            p = ftrl_solve(x, self.cover, self.params, 50).solution
            assert p[4] <= prev + 1e-12
            prev = p[4]


def test_feasible_start():
    p = feasible_start([0.0, 0.0, 1.0], 0.1)
    assert p.min() >= 0.1 - 1e-15 and p.sum() == pytest.approx(1.0)
    np.testing.assert_allclose(feasible_start([0.0, 0.0], 0.1), 0.5)


def test_converges_with_an_arm_near_the_floor_at_large_gradient_scale():
    # round 6759 of a N=10, T=2e4 run: gradient entries near -2.6e4 and one arm at 1.5e-5,
    # where an additive sum correction alone moved the gradient by ~1e-10
    cover = CliqueCover.from_cliques([[0, 1], [2, 3], [4, 5], [6, 7], [8, 9]])
    L = np.array([1591.5396360907087, 3263.449943278057, 3254.8228479786494, 3170.268926342121,
                  3512.9178601593044, 3559.2374124796233, 3541.44643774878, 3459.1239438800253,
                  3456.562102823406, 3365.696830424872])
    warm = np.array([2.2142662957984560e-01, 1.5446175441755037e-05, 7.6556282057110236e-02,
                     1.2091527587768136e-01, 1.0832499584287976e-01, 8.4577237642017258e-02,
                     7.7050221695408289e-02, 1.1642916141457027e-01, 7.4071351002197347e-02,
                     1.2063339871284816e-01])
    rep = ftrl_solve(L, cover, default_params(10, 20_000), 6759, warm_start=warm)
    assert rep.converged and rep.kkt_residual <= DEFAULT_TOL
    assert rep.solution[1] < 1e-4
