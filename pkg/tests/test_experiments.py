import math

import numpy as np
import pytest

from conftest import within_sigma
from devfreq import experiments as ex
from devfreq.errors import ConfigError, DomainError, ResourceLimitError
from devfreq.paths import PathOnGrid, dyadic_grid, normal_block


class TestStatistics:
    def test_qv_constant_path(self):
        p = PathOnGrid(np.linspace(0, 1, 5), np.full(5, 2.0))
        assert ex.qv_partial_sum(p, [0, 0.5, 1]) == 0.0

    def test_qv_single_interval(self):
        p = PathOnGrid(np.array([0.0, 0.5, 1.0]), np.array([0.0, 0.3, -1.2]))
        assert ex.qv_partial_sum(p, [0.0, 1.0]) == pytest.approx(1.44)

    def test_qv_mean(self):
        n, level = 20_000, 6
        W = ex._dyadic_batch(5, range(n), level)
        qv = np.sum(np.diff(W, axis=1) ** 2, axis=1)
        assert within_sigma(qv.mean(), 1.0, math.sqrt(2 * 2 ** -level / n))

    def test_single_term_identity(self):
        n, dt = 100_000, 0.5
        z = normal_block(9, range(n), 0, 1)[:, 0]
        x = (dt * z * z - dt) ** 2
        assert within_sigma(x.mean(), 2 * dt * dt, x.std() / math.sqrt(n))

    def test_qv_off_grid(self):
        p = PathOnGrid(np.array([0.0, 1.0]), np.array([0.0, 1.0]))
        with pytest.raises(DomainError):
            ex.qv_partial_sum(p, [0.0, 0.5])

    def test_khinchin_zero_path(self):
        t = np.geomspace(1e-6, 0.3, 200)
        assert ex.khinchin_sup_statistic(t, np.zeros_like(t), 0.25, 3) == 0.0

    def test_khinchin_bracket_guard(self):
        with pytest.raises(DomainError):
            ex.khinchin_sup_statistic([0.5], [0.0], 0.9, 0)

    def test_bridge_refine_variance(self):
        n = 40_000
        t = np.array([0.0, 1.0])
        v = np.stack([np.zeros(n), normal_block(1, range(n), 0, 1)[:, 0]], axis=1)
        z = normal_block(2, range(n), 0, 1)
        rt, rv = ex.bridge_refine(t, v, z)
        assert rt.tolist() == [0.0, 0.5, 1.0]
        assert within_sigma(rv[:, 1].var(), 0.5, 0.5 * math.sqrt(2 / n))


class TestKinds:
    @pytest.mark.parametrize("name", sorted(ex.KIND_REGISTRY))
    def test_every_kind_runs(self, name):
        kind = ex.make_kind(name)
        lo, hi = kind.n_range()
        hi = min(hi, lo + 3)
        ind = ex.generate_events(kind, 0, range(4), (lo, hi))
        assert ind.shape == (4, hi - lo + 1) and ind.dtype == bool
        assert kind.bound() is not None

    def test_sample_results_independent_of_batch(self):
        kind = ex.make_kind("levy-step")
        a = ex.generate_events(kind, 3, range(10), (1, 8))
        b = ex.generate_events(kind, 3, [7], (1, 8))
        np.testing.assert_array_equal(a[7], b[0])

    def test_monotone_first_event(self):
        ind = ex.generate_events(ex.make_kind("monotone"), 1, range(20_000), (1, 3))
        freq = ind.mean(axis=0)
        for n, f in zip((1, 2, 3), freq):
            p = 2.0 ** -n
            assert within_sigma(f, p, math.sqrt(p * (1 - p) / 20_000))

    def test_monotone_union_range(self):
        cfg = ex.ExperimentConfig(ex.make_kind("monotone"), samples=5000, seed=4, k_max=3)
        tail = ex.estimate_overlap_tail(cfg)
        p1 = tail.probability(1)
        se = math.sqrt(0.25 / 5000)
        assert 0.5 - 3 * se <= p1 <= 1.0

    def test_impossible_events(self):
        cfg = ex.ExperimentConfig(ex.make_kind("qv", eps=1e9), samples=128, k_max=3)
        tail = ex.estimate_overlap_tail(cfg)
        assert tail.exceed[0] == 128 and np.all(tail.exceed[1:] == 0)

    def test_make_kind_coercion(self):
        kind = ex.make_kind("qv", eps="0.25", scheme="dyadic-sharp")
        assert kind.eps == 0.25 and kind.bound().name.startswith("ex4")

    def test_make_kind_errors(self):
        with pytest.raises(ConfigError):
            ex.make_kind("nope")
        with pytest.raises(ConfigError):
            ex.make_kind("qv", bogus=1)
        with pytest.raises(ConfigError):
            ex.make_kind("qv", eps="abc")

    def test_range_validation(self):
        with pytest.raises(ConfigError):
            ex.ExperimentConfig(ex.make_kind("monotone"), n_range=(0, 3))
        with pytest.raises(ConfigError):
            ex.ExperimentConfig(ex.make_kind("monotone"), n_range=(5, 3))

    def test_resource_limit(self):
        with pytest.raises(ResourceLimitError):
            ex.ExperimentConfig(ex.make_kind("modulus-upper"), n_range=(2, 30))


class TestDriver:
    def test_worker_invariance(self):
        cfg = ex.ExperimentConfig(ex.make_kind("qv"), samples=200, seed=8, k_max=5)
        a = ex.run_trials(cfg, workers=1)
        b = ex.run_trials(cfg, workers=3)
        np.testing.assert_array_equal(a.counts, b.counts)
        np.testing.assert_array_equal(a.indicators, b.indicators)

    def test_seed_changes_result(self):
        k = ex.make_kind("qv", eps=0.2)
        a = ex.run_trials(ex.ExperimentConfig(k, samples=200, seed=1)).counts
        b = ex.run_trials(ex.ExperimentConfig(k, samples=200, seed=2)).counts
        assert not np.array_equal(a, b)

    def test_env_workers(self, monkeypatch):
        monkeypatch.setenv("DEVFREQ_WORKERS", "2")
        assert ex.resolve_workers() == 2
        with pytest.raises(ConfigError):
            ex.resolve_workers(0)

    def test_diagnostics_cap(self):
        cfg = ex.ExperimentConfig(ex.make_kind("qv"), samples=100)
        res = ex.run_trials(cfg, diagnostics_cap=50)
        assert res.indicators is None
        with pytest.raises(DomainError):
            res.event_frequencies()

    def test_tail_notes(self):
        cfg = ex.ExperimentConfig(ex.make_kind("monotone"), n_range=(1, 5), samples=64)
        tail = ex.estimate_overlap_tail(cfg)
        assert "n in [1, 5]" in tail.notes[0]
        assert tail.samples == 64 and tail.exceed[0] == 64
