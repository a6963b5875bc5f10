import math

import numpy as np
import pytest
from hypothesis import given, settings
from scipy.integrate import trapezoid
from hypothesis import strategies as st

from conftest import within_sigma
from devfreq.errors import DomainError, ResourceLimitError
from devfreq.paths import (
    ExplicitCoefficients,
    GaussianCoefficients,
    PathOnGrid,
    dyadic_grid,
    fbm_factor,
    generation_sup_norm,
    kkl_partial,
    levy_exact_dyadic,
    levy_partial,
    midpoint_displacement,
    normal_block,
    raw_normals,
    sample_bm,
    sample_fbm,
    sample_sheet,
    schauder_eval,
    sheet_from_normals,
    sup_distance,
    wiener_partial,
)


class TestRandomStreams:
    def test_streams_are_reproducible(self):
        a = raw_normals(3, 7, 0, 100)
        b = raw_normals(3, 7, 0, 100)
        np.testing.assert_array_equal(a, b)

    def test_offset_reads_are_consistent(self):
        whole = raw_normals(1, 2, 0, 50)
        np.testing.assert_array_equal(raw_normals(1, 2, 20, 30), whole[20:])

    def test_streams_differ(self):
        assert not np.allclose(raw_normals(0, 0, 0, 10), raw_normals(0, 1, 0, 10))

    def test_block_rows_match_single_streams(self):
        block = normal_block(5, [0, 4, 9], 3, 12)
        assert block.shape == (3, 12)
        np.testing.assert_array_equal(block[1], raw_normals(5, 4, 3, 12))

    def test_moments(self):
        z = raw_normals(11, 0, 0, 200_000)
        n = z.size
        assert within_sigma(z.mean(), 0.0, 1 / math.sqrt(n))
        assert within_sigma(z.var(), 1.0, math.sqrt(2 / n))


class TestSchauder:
    @pytest.mark.parametrize("n,t,expected", [(1, 0.5, 1.0), (1, 0.25, 0.5), (3, 0.875, 0.5)])
    def test_tent_values(self, n, t, expected):
        assert schauder_eval(n, t) == pytest.approx(expected)

    def test_zero_outside_support(self):
        assert schauder_eval(2, 0.75) == 0.0


class TestLevy:
    def test_vanishes_at_zero(self):
        Z = GaussianCoefficients(1)
        assert levy_partial(Z, 5, np.linspace(0, 1, 33)).values[0] == 0.0

    def test_level_zero_is_linear(self):
        Z = ExplicitCoefficients([1.0])
        path = levy_partial(Z, 0, [0.0, 0.5, 1.0])
        np.testing.assert_allclose(path.values, [0.0, 0.5, 1.0])

    def test_level_zero_exact(self):
        Z = GaussianCoefficients(4)
        np.testing.assert_allclose(levy_exact_dyadic(Z, 0).values, [0.0, Z.take(0, 1)[0]])

    def test_level_one_midpoint(self):
        Z = GaussianCoefficients(9)
        z = Z.take(0, 2)
        assert levy_exact_dyadic(Z, 1).values[1] == pytest.approx(z[0] / 2 + z[1] / 2)

    @pytest.mark.parametrize("J", [1, 3, 7, 10])
    def test_exact_matches_series(self, J):
        Z = GaussianCoefficients(2)
        a = levy_exact_dyadic(Z, J).values
        b = levy_partial(Z, J, dyadic_grid(J)).values
        assert np.max(np.abs(a - b)) <= 1e-12

    def test_nesting(self):
        Z = GaussianCoefficients(6)
        coarse = levy_exact_dyadic(Z, 4).values
        fine = levy_exact_dyadic(Z, 7).values
        np.testing.assert_array_equal(fine[::8], coarse)

    def test_batched_midpoint_matches_single(self):
        z = normal_block(8, [0, 1], 0, 1 << 5)
        W = midpoint_displacement(z, 5)
        single = levy_exact_dyadic(ExplicitCoefficients(z[1]), 5).values
        np.testing.assert_allclose(W[1], single, atol=1e-14)

    def test_generation_norm_positive(self):
        assert generation_sup_norm(GaussianCoefficients(0), 3) > 0

    def test_marginal_variance(self):
        z = normal_block(21, range(20_000), 0, 1 << 3)
        W = midpoint_displacement(z, 3)
        var = W[:, 4].var()  # t = 1/2
        assert within_sigma(var, 0.5, 0.5 * math.sqrt(2 / 20_000))


class TestSeries:
    def test_wiener_endpoints(self):
        p = wiener_partial(GaussianCoefficients(0), 16, [0.0, 1.0])
        np.testing.assert_allclose(p.values, 0.0, atol=1e-12)

    def test_wiener_single_mode(self):
        p = wiener_partial(ExplicitCoefficients([0.0, 1.0]), 1, [0.5])
        assert p.values[0] == pytest.approx(1.0)

    def test_kkl_single_mode(self):
        p = kkl_partial(ExplicitCoefficients([1.0]), 0, [1.0])
        assert p.values[0] == pytest.approx(2 * math.sqrt(2) / math.pi)

    def test_kkl_l2_truncation_error(self):
        # RMS L2 distance between N = 2^J and a long reference series.
        J, ref, samples = 4, 512, 400
        grid = np.linspace(0, 1, 1025)
        err = []
        for s in range(samples):
            Z = GaussianCoefficients(s, 3)
            d = kkl_partial(Z, ref, grid, 1).values - kkl_partial(Z, 1 << J, grid, 1).values
            err.append(trapezoid(d * d, grid))
        assert math.sqrt(np.mean(err)) <= 2 ** (-J / 2) / math.pi


class TestSamplers:
    def test_trivial_grids(self):
        assert sample_bm([0.0], GaussianCoefficients(0)).values.tolist() == [0.0]
        assert sample_bm([0.0, 1.0], ExplicitCoefficients([1.5])).values.tolist() == [0.0, 1.5]

    def test_rejects_bad_grid(self):
        with pytest.raises(DomainError):
            sample_bm([0.0, 0.5, 0.5], GaussianCoefficients(0))

    def test_bm_terminal_variance(self):
        n = 100_000
        w1 = normal_block(31, range(n), 0, 1)[:, 0]
        assert within_sigma(w1.var(), 1.0, math.sqrt(2 / n))

    def test_fbm_half_is_bm(self):
        grid = np.linspace(0, 1, 9)
        L = fbm_factor(grid, 0.5)
        cov = L @ L.T
        np.testing.assert_allclose(cov, np.minimum.outer(grid[1:], grid[1:]), atol=1e-12)

    def test_fbm_increment_variance(self):
        grid = np.array([0.0, 0.25, 0.75])
        n = 20_000
        d = np.array([np.diff(sample_fbm(grid, 0.3, GaussianCoefficients(s)).values[1:])[0] for s in range(n)])
        target = 0.5 ** 0.6
        assert within_sigma(np.mean(d * d), target, target * math.sqrt(2 / n))

    def test_fbm_starts_at_zero(self):
        assert sample_fbm([0.0, 0.5, 1.0], 0.7, GaussianCoefficients(1)).values[0] == 0.0

    def test_fbm_limits(self):
        with pytest.raises(ResourceLimitError):
            fbm_factor(np.linspace(0, 1, 20), 0.3, max_points=10)
        with pytest.raises(DomainError):
            fbm_factor([0.0, 1.0], 1.0)

    def test_sheet_boundary_and_moments(self):
        t = s = np.array([0.0, 0.5, 1.0])
        X = sample_sheet(t, s, GaussianCoefficients(0))
        assert np.all(X[0] == 0) and np.all(X[:, 0] == 0)
        n = 40_000
        z = normal_block(13, range(n), 0, 4)
        fields = np.array([sheet_from_normals(t, s, row) for row in z])
        a, b = fields[:, 1, 2], fields[:, 2, 2]
        assert within_sigma(b.var(), 1.0, math.sqrt(2 / n))
        assert within_sigma(np.mean(a * b), 0.5, math.sqrt(1.25 / n))

    def test_sheet_limit(self):
        with pytest.raises(ResourceLimitError):
            sample_sheet(np.linspace(0, 1, 10), np.linspace(0, 1, 10), GaussianCoefficients(0), max_points=50)


class TestPathOnGrid:
    def test_sup_distance(self):
        p = PathOnGrid(np.array([0.0, 1.0]), np.array([0.0, 1.0]))
        q = PathOnGrid(np.array([0.0, 1.0]), np.array([0.0, 0.0]))
        assert sup_distance(p, p) == 0.0
        assert sup_distance(p, q) == 1.0

    def test_grid_mismatch(self):
        with pytest.raises(DomainError):
            sup_distance(PathOnGrid(np.array([0.0]), np.array([0.0])),
                         PathOnGrid(np.array([0.0, 1.0]), np.array([0.0, 1.0])))

    def test_csv(self):
        text = PathOnGrid(np.array([0.0, 0.5]), np.array([0.0, 1.25])).to_csv()
        assert text.splitlines() == ["t,value", "0.0,0.0", "0.5,1.25"]


class TestProperties:
    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2 ** 32 - 1), J=st.integers(0, 9))
    def test_dyadic_exactness(self, seed, J):
        Z = GaussianCoefficients(seed)
        a = levy_exact_dyadic(Z, J).values
        b = levy_partial(Z, J, dyadic_grid(J)).values
        assert np.max(np.abs(a - b)) <= 1e-12

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.floats(0.001, 1.0), min_size=1, max_size=20, unique=True), st.integers(0, 1000))
    def test_bm_on_any_grid_starts_at_zero(self, pts, seed):
        grid = np.concatenate([[0.0], np.sort(pts)])
        path = sample_bm(grid, GaussianCoefficients(seed))
        assert path.values[0] == 0.0 and len(path) == len(grid)
