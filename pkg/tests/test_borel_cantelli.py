import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from devfreq import borel_cantelli as bc
from devfreq.analytic_bounds import zeta
from devfreq.errors import DomainError, HypothesisViolation


def enumerate_counts(p):
    """Exact law of the count by listing all 2^n outcomes."""
    pmf = np.zeros(len(p) + 1)
    for outcome in itertools.product((0, 1), repeat=len(p)):
        w = np.prod([pi if o else 1 - pi for pi, o in zip(p, outcome)])
        pmf[sum(outcome)] += w
    return pmf


def log_linear_inverse(p):
    """Inverse of a strictly decreasing interpolation of the tail sums ``C_m = Σ_{n>=m} p_n``.

    A vanishing floor keeps ``L`` positive after the last event.
    """
    n = len(p)
    C = np.array([p[m:].sum() for m in range(n + 1)])
    logC = np.log(np.maximum(C, 1e-12 * 0.5 ** np.arange(n + 1)))

    def inverse(s):
        ls = math.log(s)
        if ls >= logC[0]:
            return 0.0
        for m in range(n):
            if logC[m] >= ls >= logC[m + 1] and logC[m] > logC[m + 1]:
                return m + (logC[m] - ls) / (logC[m] - logC[m + 1])
        return n + (logC[n] - ls) / math.log(2)

    return inverse


class TestWeights:
    def test_antiderivative_basics(self):
        assert bc.antiderivative(bc.WeightSequence.power(1), 0) == 0
        assert bc.antiderivative(bc.WeightSequence.power(1), 4) == 10

    def test_exponential_closed_form(self):
        w = bc.WeightSequence.exponential(0.3)
        direct = sum(math.exp(0.3 * n) for n in range(1, 8))
        assert bc.antiderivative(w, 7) == pytest.approx(direct, rel=1e-13)

    def test_custom(self):
        w = bc.WeightSequence.custom(lambda n: 2.0)
        assert bc.antiderivative(w, 5) == 10


class TestMomentBound:
    def test_zero_probabilities(self):
        assert bc.weighted_moment_bound(lambda n: 0.0, bc.WeightSequence.power(1), 10).K_a == 0

    def test_riemann_example(self):
        res = bc.weighted_moment_bound(lambda n: n ** -4.0, bc.WeightSequence.power(0.5), 1000)
        assert res.K_a <= bc.riemann_example_bound(1, 4, 0.5)
        assert bc.riemann_example_bound(1, 4, 0.5) == pytest.approx(4 * zeta(2.5))

    def test_riemann_hypothesis(self):
        with pytest.raises(HypothesisViolation):
            bc.riemann_example_bound(1, 3, 1.5)

    def test_divergent_series_flagged(self):
        with pytest.raises(HypothesisViolation):
            bc.weighted_moment_bound(lambda n: n ** -2.0, bc.WeightSequence.power(1), 50, scan_cap=10_000)

    def test_tail_budget(self):
        res = bc.weighted_moment_bound(lambda n: 2.0 ** -n, bc.WeightSequence.power(0), 5, tail_budget=0.5)
        assert res.K_a == pytest.approx(res.truncated + 0.5)
        assert res.as_bound()(1) == pytest.approx(res.tail(1))

    def test_geometric_tail_estimate(self):
        res = bc.weighted_moment_bound(lambda n: 2.0 ** -n, bc.WeightSequence.power(0), 5)
        # Σ_m 2^{-m} m = 2
        assert res.K_a == pytest.approx(2.0, rel=1e-9)


class TestExpMoments:
    def test_examples(self):
        assert bc.exp_moment_bound(0, 0.5, 0.1) == 1
        assert bc.exp_moment_bound(1, 0.5, 0, 1) == pytest.approx(3)

    def test_domain(self):
        with pytest.raises(HypothesisViolation):
            bc.exp_moment_bound(1, 0.5, math.log(2))

    def test_bernoulli_mc(self):
        rng = np.random.default_rng(3)
        n = 100_000
        p = 0.5 ** np.arange(1, 40)
        O = (rng.random((n, p.size)) < p).sum(axis=1)
        vals = np.exp(0.2 * O)
        assert vals.mean() - 3 * vals.std() / math.sqrt(n) <= bc.exp_moment_bound(1, 0.5, 0.2)

    def test_exponential_decay_substitution(self):
        L_inv = bc.exponential_decay_L_inv(1.0, 0.5)
        assert bc.asymptotic_exp_moment(L_inv, 2, 0.3, 2) == pytest.approx(
            bc.exponential_decay_moment(1.0, 0.5, 0.3, 2), rel=1e-12)

    def test_gaussian_decay_substitution(self):
        L_inv = bc.gaussian_decay_L_inv(0.9)
        assert bc.asymptotic_exp_moment(L_inv, 2, 1.0, 1) == pytest.approx(
            bc.gaussian_decay_moment(0.9, 1.0, 1), rel=1e-12)

    def test_vanishes_in_N(self):
        L_inv = bc.exponential_decay_L_inv(1.0, 0.5)
        assert bc.asymptotic_exp_moment(L_inv, 2, 0.5, 200) < 1e-30

    def test_threshold_form_dominates(self):
        L_inv = bc.exponential_decay_L_inv(1.0, 0.5)
        assert bc.threshold_exp_moment(L_inv, 2, 0.5, 3) >= bc.asymptotic_exp_moment(L_inv, 2, 0.5, 3)


class TestGaussianDecayTail:
    def test_monotone(self):
        assert bc.gaussian_decay_tail(0.8, 2, 4) < bc.gaussian_decay_tail(0.8, 2, 3)
        assert bc.gaussian_decay_tail(0.8, 3, 3) < bc.gaussian_decay_tail(0.8, 2, 3)

    def test_dominates_infimum(self):
        assert bc.gaussian_decay_infimum(0.8, 2, 3) <= bc.gaussian_decay_tail(0.8, 2, 3)

    def test_steeper_exponent_does_not_dominate(self):
        # The 1/3 coefficient overshoots the optimized infimum here.
        assert bc.gaussian_decay_tail(0.8, 2, 3, exponent=1 / 3) < bc.gaussian_decay_infimum(0.8, 2, 3)

    def test_guard(self):
        with pytest.raises(DomainError):
            bc.gaussian_decay_tail(0.995, 1, 1)

    def test_asymptotic_tail_variants(self):
        L_inv = bc.exponential_decay_L_inv(1.0, 0.5)
        for variant in ("minus-one", "plus-one"):
            v = bc.asymptotic_tail(L_inv, 2, 3, 4, variant)
            assert 0 < v <= 1


class TestCounts:
    def test_count_overlaps(self):
        assert bc.count_overlaps([0, 0, 0]) == 0
        assert bc.count_overlaps([1, 0, 1, 1]) == 3

    def test_distribution_matches_enumeration(self, rng):
        p = rng.uniform(0, 1, 8)
        np.testing.assert_allclose(bc.overlap_distribution(p), enumerate_counts(p), atol=1e-14)

    def test_last_entry(self):
        assert bc.last_entry_distribution([0.5], 1) == (0.5, 0.5)
        lo, hi = bc.last_entry_distribution(0.5 ** np.arange(1, 61), 2)
        assert lo == hi == pytest.approx(0.25 * np.prod(1 - 0.5 ** np.arange(3, 61)))

    def test_last_entry_with_tail(self):
        lo, hi = bc.last_entry_distribution([0.2, 0.3], 1, tail_sum=0.1)
        assert lo == pytest.approx(0.9 * hi)


class TestOverlapTail:
    def test_from_counts(self):
        t = bc.OverlapTail.from_counts("x", np.array([0, 1, 1, 3]), 4)
        np.testing.assert_array_equal(t.exceed, [4, 3, 1, 1, 0])
        assert t.probability(1) == 0.75
        np.testing.assert_allclose(t.frequencies(), [1, 0.75, 0.25, 0.25, 0])


class TestEnumerationOracle:
    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=10), st.sampled_from([0.0, 0.5, 1.0, 2.0]))
    def test_lemma_moment(self, p, power):
        p = np.asarray(p)
        pmf = enumerate_counts(p)
        w = bc.WeightSequence.power(power)
        lhs = sum(pmf[k] * bc.antiderivative(w, k) for k in range(len(pmf)))
        K = bc.weighted_moment_bound(lambda n: p[n - 1] if n <= len(p) else 0.0, w, len(p), tail_budget=0.0).K_a
        assert lhs <= K * (1 + 1e-12) + 1e-15

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.floats(0.0, 0.95), min_size=1, max_size=10),
           st.floats(0.05, 5.0), st.floats(1.1, 5.0), st.data())
    def test_threshold_exp_moment(self, p, r, delta, data):
        p = np.asarray(p)
        N = data.draw(st.integers(0, len(p) - 1))
        pmf = enumerate_counts(p[N + 1:])
        lhs = float(np.sum(pmf * np.exp(r * np.arange(len(pmf))))) - 1
        assert lhs <= bc.threshold_exp_moment(log_linear_inverse(p), delta, r, N) * (1 + 1e-12)

    def test_printed_form_counterexample(self):
        # Two events; O_0 counts only the second.  A steep interpolation of the
        # tail sums pulls L^{-1} just past 1 and the printed form undershoots.
        p = np.array([0.1289, 0.3806])
        lhs = p[1] * (math.exp(2) - 1)
        rhs = bc.asymptotic_exp_moment(log_linear_inverse(p), 2, 2, 0)
        assert lhs > rhs
