"""Planners, truncation, multilevel telescoping and estimator statistics."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plrquad.cbc import cbc_construct
from plrquad.errors import ConfigurationError, OutOfRegimeError, PlanError
from plrquad.infdim import (
    FixedAlgorithm,
    FixedPlan,
    LevelDifference,
    MultilevelAlgorithm,
    MultilevelPlan,
    cost_fixed,
    cost_variable,
    fixed_estimate,
    level_integrand,
    level_seed,
    ml_estimate,
    ml_level_estimates,
    multilevel_target_levels,
    plan_fixed,
    plan_multilevel,
    truncate,
)
from plrquad.scramble import ScrambleSpec
from plrquad.wspace import PowerWeights, ProductIntegrand, truncated_integral


def _f(alpha=3.0, shape="linear"):
    return ProductIntegrand(PowerWeights(alpha), shape).normalized()


regime = st.tuples(
    st.floats(min_value=2**3, max_value=2**40),
    st.floats(min_value=3.0, max_value=14.0),
    st.floats(min_value=0.01, max_value=2.9),
)


class TestPlanFixed:
    def test_examples(self):
        p = plan_fixed(1e4, 3.0, 0.1)
        assert (p.n, p.s) == (32, 233)
        assert p.n_raw == pytest.approx(42.919, abs=1e-3)
        assert p.s_raw == pytest.approx(232.995, abs=1e-3)
        assert plan_fixed(1e6, 4.0, 0.1).n == 1024

    @settings(max_examples=300)
    @given(regime)
    def test_compliance(self, params):
        N, alpha, eps = params
        p = plan_fixed(N, alpha, eps)
        assert cost_fixed(p) <= N
        assert p.n_raw * p.s_raw == pytest.approx(N, rel=1e-9)
        assert N / 4 <= p.n * p.s <= N
        assert p.n & (p.n - 1) == 0 and p.slack >= 0

    def test_monotone(self):
        plans = [plan_fixed(2.0**k, 3.0, 0.1) for k in range(10, 20)]
        assert all(a.n <= b.n and a.s <= b.s for a, b in zip(plans, plans[1:]))

    @pytest.mark.parametrize("alpha, eps", [(2.9, 0.1), (3.0, 0.0), (4.0, -1.0)])
    def test_out_of_regime(self, alpha, eps):
        with pytest.raises(OutOfRegimeError):
            plan_fixed(1e4, alpha, eps)

    def test_bad_budget(self):
        with pytest.raises(ConfigurationError):
            plan_fixed(1.0, 3.0, 0.1)

    def test_plan_validation(self):
        with pytest.raises(PlanError):
            FixedPlan(100, 1, 3)
        with pytest.raises(PlanError):
            FixedPlan(100, 4, 3, anchor=2.0)
        assert FixedPlan(100, 12, 3).n_eff == 8


class TestPlanMultilevel:
    def test_example(self):
        p = plan_multilevel(2**20, 10.0, 0.5)
        assert p.L == 6
        assert p.dims == (2, 4, 8, 16, 32, 64)
        assert p.rho1 == pytest.approx(9 / 2.75)

    def test_target_levels(self):
        assert multilevel_target_levels(2**20, 10.0, 0.5) == 6
        assert multilevel_target_levels(2**24, 6.0, 0.1) == math.ceil(2.9 * 24 / 5)

    @settings(max_examples=300)
    @given(regime)
    def test_compliance(self, params):
        N, alpha, eps = params
        alpha = max(alpha, 3.05)
        eps = min(eps, 0.99 * (alpha - 3))
        p = plan_multilevel(N, alpha, eps)
        assert cost_variable(p) <= N
        assert p.dims == tuple(2**l for l in range(1, p.L + 1))
        assert all(n >= 2 and n & (n - 1) == 0 for n in p.points)
        assert all(a >= b for a, b in zip(p.points, p.points[1:]))
        assert p.L <= p.target_levels

    @pytest.mark.parametrize("alpha, eps", [(3.0, 0.1), (4.0, 1.0), (12.0, 6.0), (5.0, 0.0)])
    def test_out_of_regime(self, alpha, eps):
        with pytest.raises(OutOfRegimeError):
            plan_multilevel(2**16, alpha, eps)

    def test_explicit_lambda(self):
        p = plan_multilevel(2**16, 6.0, 0.1, lam=64.0)
        assert p.points[0] == 2 ** math.floor(math.log2(64 * 0.5 ** (1 / 3.9)))

    def test_plan_validation(self):
        with pytest.raises(PlanError):
            MultilevelPlan(100, (4, 2), (4, 4))
        with pytest.raises(PlanError):
            MultilevelPlan(100, (2, 4), (4, 1))
        with pytest.raises(PlanError):
            MultilevelPlan(100, (), ())


class TestTruncation:
    def test_integral(self):
        f = _f()
        for s in (0, 1, 7):
            for a in (0.0, 0.3, 0.5):
                assert truncate(f, s, a).integral() == pytest.approx(truncated_integral(f, s, a), rel=1e-15)

    def test_zero_dimension(self):
        f = _f()
        t = truncate(f, 0, 0.0)
        np.testing.assert_allclose(t(np.zeros((3, 0))), truncated_integral(f, 0, 0.0))

    def test_errors(self):
        with pytest.raises(ConfigurationError):
            truncate(_f(), 2, 1.5)
        with pytest.raises(ConfigurationError):
            truncate(_f(), 4, 0.0)(np.zeros((2, 3)))


class TestLevelDifference:
    @settings(max_examples=50)
    @given(st.integers(0, 30), st.integers(1, 40), st.sampled_from([0.0, 0.2, 1.0]), st.sampled_from(["linear", "quadratic"]))
    def test_matches_naive(self, s_prev, extra, a, shape):
        f = _f(3.0, shape)
        s = s_prev + extra
        x = np.random.default_rng(s).random((16, s))
        d = LevelDifference(f, s_prev, s, a)
        naive = truncate(f, s, a)(x) - truncate(f, s_prev, a)(x)
        np.testing.assert_allclose(d(x), naive, rtol=1e-9, atol=1e-14)

    def test_relative_accuracy(self):
        # far levels: the difference is tiny and must not be lost to cancellation
        f = _f(8.0)
        d = LevelDifference(f, 512, 1024, 0.0)
        x = np.full((1, 1024), 0.9)
        coef = f.coefficients(1024)[512:]
        bracket = math.expm1(math.fsum(np.log1p(coef * 0.4)) - math.fsum(np.log1p(coef * -0.5)))
        expected = f.scale * f.tail(1024, 0.0) * np.prod(1 + f.coefficients(512) * 0.4) * math.exp(math.fsum(np.log1p(coef * -0.5))) * bracket
        assert d(x)[0] == pytest.approx(expected, rel=1e-10)

    @pytest.mark.parametrize("a", [0.0, 0.5, 0.8])
    def test_telescoping(self, a):
        f = _f(6.0, "quadratic")
        plan = plan_multilevel(2**18, 6.0, 0.1, anchor=a)
        total = math.fsum(level_integrand(f, plan, l).integral() for l in range(plan.L))
        assert abs(total - truncated_integral(f, plan.dims[-1], a)) < 1e-12


@pytest.fixture(scope="module")
def small_ml():
    f = _f(6.0)
    plan = MultilevelPlan(2**12, (2, 4, 8), (64, 16, 8), anchor=0.0, alpha=6.0, eps=0.1)
    vectors = [cbc_construct(m, s, PowerWeights(6.0))[0] for m, s in zip(plan.ms, plan.dims)]
    return f, plan, vectors


class TestEstimators:
    def test_single_level_is_fixed(self):
        f = _f()
        g, _ = cbc_construct(5, 6, PowerWeights(3.0))
        ml = MultilevelPlan(192, (6,), (32,), anchor=0.0)
        fx = FixedPlan(192, 32, 6, anchor=0.0)
        for r in range(5):
            spec = ScrambleSpec("owen", seed=level_seed(9, 0), replicate_id=r)
            assert ml_estimate(f, ml, [g], 9, r) == fixed_estimate(f, fx, g, spec)

    def test_algorithm_matches_function(self, small_ml):
        f, plan, vectors = small_ml
        alg = MultilevelAlgorithm(plan, vectors)
        np.testing.assert_array_equal(alg.level_estimates(f, 3, 1), ml_level_estimates(f, plan, vectors, 3, 1))
        assert alg.cost == cost_variable(plan) == 2 * 64 + 4 * 16 + 8 * 8

    def test_levels_independent_streams(self):
        assert len({level_seed(1, l) for l in range(50)}) == 50

    def test_vector_mismatch(self, small_ml):
        f, plan, vectors = small_ml
        with pytest.raises(ConfigurationError):
            MultilevelAlgorithm(plan, vectors[:2])
        with pytest.raises(ConfigurationError):
            MultilevelAlgorithm(plan, [vectors[1]] * 3)
        with pytest.raises(ConfigurationError):
            FixedAlgorithm(FixedPlan(100, 16, 7), vectors[0])

    @pytest.mark.parametrize("a", [0.5, 0.0])
    def test_fixed_unbiased(self, a):
        f = _f()
        plan = FixedPlan(2**10, 16, 12, anchor=a)
        g, _ = cbc_construct(4, 12, PowerWeights(3.0))
        alg = FixedAlgorithm(plan, g)
        reps = 1000
        q = np.array([alg.estimate(f, 21, r) for r in range(reps)])
        target = truncated_integral(f, 12, a)
        se = q.std(ddof=1) / math.sqrt(reps)
        assert abs(q.mean() - target) < 4 * se
        if a == 0.5:
            assert target == f.scale
        else:
            # truncation bias: the estimator converges to the truncated integral, not to I(f)
            assert abs(target - f.scale) > 10 * se

    def test_multilevel_unbiased(self, small_ml):
        f, plan, vectors = small_ml
        alg = MultilevelAlgorithm(plan, vectors)
        reps = 1000
        q = np.array([alg.estimate(f, 5, r) for r in range(reps)])
        se = q.std(ddof=1) / math.sqrt(reps)
        assert abs(q.mean() - truncated_integral(f, 8, 0.0)) < 4 * se

    def test_bias_variance(self, small_ml):
        f, plan, vectors = small_ml
        alg = MultilevelAlgorithm(plan, vectors)
        reps = 1000
        levels = np.array([alg.level_estimates(f, 5, r) for r in range(reps)])
        q = levels.sum(axis=1)
        exact = f.scale
        mse = np.mean((q - exact) ** 2)
        bias = truncated_integral(f, 8, 0.0) - exact
        var = q.var()
        # mse = (mean - I)^2 + var holds exactly; the mean estimates I_trunc
        assert mse == pytest.approx((q.mean() - exact) ** 2 + var, rel=1e-10)
        assert abs(q.mean() - exact - bias) < 4 * q.std(ddof=1) / math.sqrt(reps)
        # independent levels: the variance of the sum is the sum of level variances
        level_var = levels.var(axis=0, ddof=1).sum()
        assert q.var(ddof=1) == pytest.approx(level_var, rel=0.2)
