import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from devfreq import analytic_bounds as ab
from devfreq.errors import DomainError, HypothesisViolation

E98 = math.exp(9 / 8)


class TestConstants:
    @pytest.mark.parametrize("key,value", [
        ("C_a", 2.9240), ("c_1", 2.2084), ("c_2", 1.3323), ("C_a*c_1", 6.4572), ("C_a*c_2", 3.8956),
        ("C (fixed-eps Levy)", 33.0523), ("K (Doob)", 39.6730), ("24/(5 pi)", 1.5278), ("e^(9/8)", 3.0802),
    ])
    def test_printed_decimals(self, key, value):
        assert ab.CONSTANTS[key] == pytest.approx(value, abs=1e-4)

    def test_c_pi_closed_form(self):
        # 1024/π² rounds to 103.7529, not the 103.7439 printed alongside it.
        assert ab.CONSTANTS["c_pi"] == pytest.approx(1024 / math.pi ** 2, rel=1e-15)
        assert round(ab.CONSTANTS["c_pi"], 4) == 103.7529

    def test_closed_forms(self):
        ln2 = math.log(2)
        assert ab.C_A == pytest.approx(math.sqrt(2 / ln2) * (1 + 1 / (2 * ln2)))
        assert ab.K_DOOB == pytest.approx(16 * (1 / math.sqrt(2) + math.sqrt(math.pi)))


class TestSpecialFunctions:
    def test_zeta_closed_forms(self):
        assert ab.zeta(2) == pytest.approx(math.pi ** 2 / 6, rel=1e-12)
        assert ab.zeta(4) == pytest.approx(math.pi ** 4 / 90, rel=1e-12)
        assert ab.zeta(3) == pytest.approx(1.2020569032, abs=1e-10)

    def test_zeta_domain(self):
        with pytest.raises(DomainError):
            ab.zeta(1.0)

    def test_gamma_examples(self):
        assert ab.gamma_upper_bound(1, 2) == pytest.approx(math.exp(-2))
        v = ab.gamma_upper_bound(1.5, 5)
        assert v == pytest.approx(1.1 * math.sqrt(5) * math.exp(-5))
        assert v >= special.gammaincc(1.5, 5) * special.gamma(1.5)

    @pytest.mark.parametrize("a", [0.5, 1.0, 1.5, 2.0])
    def test_gamma_dominance_where_valid(self, a):
        for z in np.linspace(0.5, 20, 40):
            exact = integrate.quad(lambda x: x ** (a - 1) * math.exp(-x), z, math.inf)[0]
            assert ab.gamma_upper_bound(a, z) >= exact * (1 - 1e-12)

    def test_gamma_majorant_breaks_above_two(self):
        # One remainder term is not enough once a > 2.
        exact = special.gammaincc(2.5, 0.5) * special.gamma(2.5)
        assert ab.gamma_upper_bound(2.5, 0.5) < exact

    def test_mills(self):
        assert ab.mills_upper(1.0) == pytest.approx(0.6065, abs=1e-4)
        assert ab.mills_upper(3.0) == pytest.approx(0.003702, abs=1e-6)
        t = np.linspace(0.1, 10, 200)
        assert np.all(ab.mills_upper(t) >= special.ndtr(-t))

    def test_moment_constant(self):
        assert ab.moment_constant(2) == pytest.approx(1.0)
        assert ab.moment_constant(4) == pytest.approx(3.0)

    def test_chung_limits(self):
        assert ab.chung_sup_cdf(100.0) == pytest.approx(1.0, abs=1e-6)
        assert 0 < ab.chung_sup_cdf(math.pi / math.sqrt(8)) < 1

    def test_chung_monotone(self):
        xs = np.linspace(0.3, 3, 30)
        vals = [ab.chung_sup_cdf(x) for x in xs]
        assert np.all(np.diff(vals) > 0)


class TestOptimalExponent:
    def test_simplified_value(self):
        assert ab.optimal_exponent(1, 0.5, 1).simplified == pytest.approx(2 * E98 * 3 * 0.5)

    def test_is_grid_minimum(self):
        res = ab.optimal_exponent(3, 0.25, 5)
        p = np.linspace(0, -math.log(0.25), 200_001)[:-1]
        assert np.min(ab._g_exponent(p, 3, 0.25, 5)) >= res.value * (1 - 1e-9)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(1, 50), st.floats(0.05, 0.9), st.integers(1, 50))
    def test_lemma_inequality(self, M, b, k):
        # Where the simplified form undershoots the minimum, it is vacuous anyway.
        res = ab.optimal_exponent(M, b, k)
        assert res.value <= res.simplified * (1 + 1e-12) or res.simplified >= 1

    def test_minimizer_clipped_at_zero(self):
        res = ab.optimal_exponent(10, 0.9, 1)
        assert res.p_k == 0.0
        assert res.value == pytest.approx(10 / 0.1 + 1)
        assert res.simplified < res.value

    def test_exp_tail_examples(self):
        assert ab.exp_tail_bound(1, 0.5, 1, 1) == pytest.approx(3 * E98)
        assert ab.exp_tail_bound(3, 0.5, 0, 10) == pytest.approx(2 * E98 * 71 / 1024)
        assert ab.exp_tail_bound(3, 0.5, 0, 10) == pytest.approx(0.427, abs=1e-3)

    def test_domain(self):
        with pytest.raises(HypothesisViolation):
            ab.optimal_exponent(0.5, 0.5, 1)


class TestLevyBounds:
    def test_step_tail(self):
        assert ab.levy_bounds("c", alpha=1, J=0)(1) == pytest.approx(0.5)

    def test_fixed_eps_valid_range(self):
        b = ab.build_bound("thm1d", eps=0.5)
        assert b.k_min == 3
        with pytest.raises(DomainError):
            b(2)
        c = ab.C_LEVY_FIXED / 0.5
        assert b(4) == pytest.approx(math.e * (1 + c * 8) / 4)

    def test_last_level_bracket(self):
        lo, hi = ab.levy_bounds("b", alpha=1, k=3)
        assert lo == pytest.approx(2 ** -8 * math.exp(-2 ** -4 / 3))
        assert hi == pytest.approx(2 ** -6 * math.exp(-2 ** -6 / 3))

    def test_rate_schedule_decreases(self):
        s = ab.levy_bounds("a", alpha=1)
        assert s(10) < s(5)


class TestContinuityBounds:
    def test_chentsov_bm(self):
        h = ab.holder_example("bm", 4)
        assert h["beta"] == 1 and h["C"] == pytest.approx(3)
        b = ab.build_bound("thm3", alpha=4, beta=1, C=3, gamma=0.2)
        M = 3 * (2 ** 0.2 - 1) / (1 - 2 ** -0.2)
        assert b(5) == pytest.approx(2 * E98 * (5 * (M + 1) + 1) * 0.5)

    def test_chentsov_names_violation(self):
        with pytest.raises(HypothesisViolation, match="β − αγ > 0"):
            ab.build_bound("thm3", alpha=1, beta=0.5, gamma=1)

    def test_doob_range(self):
        assert ab.build_bound("thm2", eps=1.0).k_min == 5

    def test_doob_schedule_requires_theta(self):
        with pytest.raises(HypothesisViolation):
            ab.doob_schedule(2.0)


class TestOtherBounds:
    def test_monotone_vacuous(self):
        assert ab.build_bound("thm7")(1) == pytest.approx(4 * E98)

    def test_modulus_rate(self):
        assert ab.modulus_rate(0.2, 1.0) == pytest.approx(2.0)

    def test_qv(self):
        assert ab.qv_event_variance(0.5) == pytest.approx(0.5)
        assert ab.build_bound("ex4", t=1, eps=2)(4) == pytest.approx(2 * E98 * 9 / 16)

    def test_kolmogorov_example(self):
        assert ab.build_bound("ex8", eps=0.25)(4) == pytest.approx(2 * E98 * 21 / 4)

    def test_strassen(self):
        assert ab.strassen_b(1, 2) == pytest.approx(2 * math.exp(5))
        v = ab.build_bound("thm13-3a", eta=1, vartheta=0.9, p=0.5, q=math.e, eps=2)(10)
        assert v == pytest.approx(10 ** -1.5 * (1.5 * 2.8 / 1.8) * ab.strassen_b(1, 2) * ab.zeta(1.3))

    def test_log_sum_constant_finite(self):
        c = ab.log_sum_tail_constant(1.0)
        partial = sum(1 / (n * math.log(n + 1) ** 2) for n in range(1, 10_000))
        assert partial < c < partial + 1 / math.log(9_999)

    def test_shape_only_flag(self):
        assert ab.build_bound("thm5-lower").shape_only

    @pytest.mark.parametrize("name", sorted(ab.BOUND_REGISTRY))
    def test_registry_defaults_evaluate(self, name):
        b = ab.build_bound(name)
        rows = b.table(b.k_min, b.k_min + 5)
        assert rows and all(v >= 0 and math.isfinite(v) for _, v in rows)
        assert b.to_dict(b.k_min + 2)["name"] == b.name

    def test_unknown(self):
        with pytest.raises(DomainError):
            ab.build_bound("nope")


class TestProperties:
    @settings(max_examples=50, deadline=None)
    @given(st.sampled_from(sorted(ab.BOUND_REGISTRY)))
    def test_geometric_tails_eventually_decrease(self, name):
        b = ab.build_bound(name)
        k = b.k_min + 40
        if b.valid(k) and b.valid(k + 1):
            assert b(k + 1) <= b(k)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0.05, 3.0))
    def test_thm1d_decreasing_in_eps(self, eps):
        assert ab.build_bound("thm1d", eps=eps * 1.5)(6) <= ab.build_bound("thm1d", eps=eps)(6)
