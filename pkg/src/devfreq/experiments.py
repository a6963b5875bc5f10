"""Event schedules on sampled paths and Monte Carlo overlap-count estimation.

Each event kind maps a batch of sample indices to a boolean matrix of shape
``(samples, len(n_values))``.  Sample ``i`` draws all of its randomness from
the counter-based stream ``(seed, i)``, so results do not depend on batching
or on the number of worker processes.
"""

from __future__ import annotations

import dataclasses
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import ClassVar, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.ndimage import maximum_filter1d, minimum_filter1d

from . import analytic_bounds as ab
from .analytic_bounds import BoundSpec
from .borel_cantelli import OverlapTail
from .errors import ConfigError, DomainError, ResourceLimitError
from .paths import (MAX_DENSE_POINTS, MAX_SHEET_POINTS, PathOnGrid, bm_from_normals, check_level,
                    fbm_factor, midpoint_displacement, normal_block, sheet_from_normals)
from .taut_string import ENERGY_SLACK, min_energy_in_tube

MAX_GRID_POINTS = 1 << 20
CHUNK = 64
DIAGNOSTICS_CAP = 1000


def _normals(seed: int, ids: Sequence[int], count: int) -> np.ndarray:
    return normal_block(seed, ids, 0, count)


def _bm_batch(seed: int, ids: Sequence[int], grid: np.ndarray) -> np.ndarray:
    """Brownian values on ``grid`` (starting at 0) for each sample, shape ``(B, len(grid))``."""
    if len(grid) > MAX_GRID_POINTS:
        raise ResourceLimitError(f"grid of {len(grid)} points exceeds {MAX_GRID_POINTS}")
    return bm_from_normals(grid, _normals(seed, ids, len(grid) - 1))


def _dyadic_batch(seed: int, ids: Sequence[int], level: int, scale: float = 1.0) -> np.ndarray:
    """Level-``level`` dyadic Brownian values on ``[0, scale]`` via midpoint displacement."""
    check_level(level)
    z = _normals(seed, ids, 1 << level)
    return math.sqrt(scale) * midpoint_displacement(z, level)


def _union_grid(parts) -> np.ndarray:
    grid = np.unique(np.concatenate([np.asarray(p, dtype=float) for p in parts] + [np.zeros(1)]))
    if len(grid) > MAX_GRID_POINTS:
        raise ResourceLimitError(f"union grid of {len(grid)} points exceeds {MAX_GRID_POINTS}")
    return grid


def _positions(grid: np.ndarray, times: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(grid, times)
    if np.any(idx >= len(grid)) or not np.array_equal(grid[idx], times):
        raise DomainError("requested times are not on the sampled grid")
    return idx


# ---------------------------------------------------------------------------
# Public statistics
# ---------------------------------------------------------------------------


def qv_partial_sum(path: PathOnGrid, partition) -> float:
    """``Σ (W_{t_{i+1}} − W_{t_i})²`` over ``partition``, a subset of the path grid."""
    times = np.asarray(path.times, dtype=float)
    part = np.asarray(partition, dtype=float)
    idx = _positions(times, part)
    inc = np.diff(np.asarray(path.values, dtype=float)[idx])
    return float(np.sum(inc * inc))


def khinchin_sup_statistic(times, values, theta: float, n: int) -> float:
    """``max W_s / √(2 s ln ln(1/s))`` over grid points with ``θ^{n+1} < s <= θ^n``.

    A grid maximum is a lower bound for the supremum over the bracket.

    Raises:
        DomainError: bracket reaches ``1/e`` or contains no grid point.
    """
    hi, lo = theta ** n, theta ** (n + 1)
    if not hi < 1.0 / math.e:
        raise DomainError("bracket must lie below 1/e")
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    mask = (t > lo) & (t <= hi)
    if not mask.any():
        raise DomainError(f"no grid point in ({lo:.3g}, {hi:.3g}]")
    return float(np.max(v[..., mask] / ab.lil_envelope(t[mask])))


def bridge_refine(times, values, z) -> Tuple[np.ndarray, np.ndarray]:
    """Insert the midpoint of every interval by conditional (bridge) sampling.

    Args:
        times: Coarse grid.
        values: Brownian values on the coarse grid, batched on leading axes.
        z: Standard normals, one per interval.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    dt = np.diff(t)
    mid_t = t[:-1] + dt / 2
    mid_v = 0.5 * (v[..., :-1] + v[..., 1:]) + 0.5 * np.sqrt(dt) * z
    out_t = np.empty(2 * len(t) - 1)
    out_t[0::2], out_t[1::2] = t, mid_t
    out_v = np.empty(v.shape[:-1] + (2 * len(t) - 1,))
    out_v[..., 0::2], out_v[..., 1::2] = v, mid_v
    return out_t, out_v


# ---------------------------------------------------------------------------
# Event kinds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EventKind:
    """Base class; subclasses define the events ``E_n`` and the matching bound."""

    name: ClassVar[str] = ""
    default_range: ClassVar[Tuple[int, int]] = (1, 10)

    def n_range(self) -> Tuple[int, int]:
        return self.default_range

    def validate_range(self, n_min: int, n_max: int) -> None:
        if n_min > n_max:
            raise ConfigError("n_min must not exceed n_max")

    def bound(self) -> Optional[BoundSpec]:
        return None

    def notes(self) -> Tuple[str, ...]:
        return ()

    def evaluate(self, seed: int, ids: Sequence[int], n_values: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def count(self, indicators: np.ndarray) -> np.ndarray:
        return indicators.sum(axis=1)

    def params(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class LevyOverlap(EventKind):
    """``‖L^J − L^{J_ref}‖_∞ > ε`` (or ``> δ_J`` when ``theta > 0``) on the level-``J_ref`` grid."""

    eps: float = 0.5
    J_ref: int = 16
    theta: float = 0.0
    name: ClassVar[str] = "levy-overlap"
    default_range: ClassVar[Tuple[int, int]] = (0, 14)

    def validate_range(self, n_min, n_max):
        super().validate_range(n_min, n_max)
        if n_min < 0 or n_max >= self.J_ref:
            raise ConfigError("levels must satisfy 0 <= J < J_ref")

    def bound(self):
        if self.theta > 0:
            return ab.build_bound("thm1e", theta=self.theta)
        return ab.build_bound("thm1d", eps=self.eps)

    def notes(self):
        return (f"L^{self.J_ref} stands in for W; levels beyond the range are not counted",)

    def evaluate(self, seed, ids, n_values):
        Jr = self.J_ref
        vals = _dyadic_batch(seed, ids, Jr)
        out = np.zeros((len(ids), len(n_values)), dtype=bool)
        tol = ab.levy_delta_rate(self.theta) if self.theta > 0 else None
        for col, J in enumerate(n_values):
            step = 1 << (Jr - J)
            coarse = vals[:, ::step]
            frac = np.arange(step) / step
            interp = coarse[:, :-1, None] + np.diff(coarse, axis=1)[:, :, None] * frac
            err = np.max(np.abs(interp.reshape(len(ids), -1) - vals[:, :-1]), axis=1)
            out[:, col] = err > (tol(int(J)) if tol is not None else self.eps)
        return out


@dataclass(frozen=True)
class LevyStep(EventKind):
    """Generation sup-norm ``‖L^j − L^{j−1}‖_∞`` above ``√(1+α)√(2 ln 2)√j 2^{-j/2}``, ``j > J``."""

    alpha: float = 1.0
    J: int = 0
    name: ClassVar[str] = "levy-step"
    default_range: ClassVar[Tuple[int, int]] = (1, 14)

    def n_range(self):
        return (self.J + 1, max(self.J + 1, 14))

    def validate_range(self, n_min, n_max):
        super().validate_range(n_min, n_max)
        if n_min <= self.J:
            raise ConfigError("generations must exceed J")
        check_level(n_max)

    def bound(self):
        return ab.build_bound("thm1c", alpha=self.alpha, J=self.J)

    def evaluate(self, seed, ids, n_values):
        top = int(max(n_values))
        z = _normals(seed, ids, 1 << top)
        tol = ab.levy_step_tolerance(self.alpha)
        out = np.zeros((len(ids), len(n_values)), dtype=bool)
        for col, j in enumerate(n_values):
            j = int(j)
            sup = 2.0 ** (-(j + 1) / 2.0) * np.max(np.abs(z[:, 1 << (j - 1) : 1 << j]), axis=1)
            out[:, col] = sup > tol(j)
        return out


@dataclass(frozen=True)
class Doob(EventKind):
    """``sup_{|s−r|<=1/n} |W_s − W_r| >= 2ε`` on a uniform grid of ``4n+1`` points."""

    eps: float = 1.0
    theta: float = 0.0
    name: ClassVar[str] = "doob"
    default_range: ClassVar[Tuple[int, int]] = (1, 40)

    def bound(self):
        if self.theta > 0:
            return ab.build_bound("thm2-schedule", theta=self.theta)
        return ab.build_bound("thm2", eps=self.eps)

    def notes(self):
        return ("sup over rationals approximated on 4n+1 grid points (underestimates the event)",)

    def evaluate(self, seed, ids, n_values):
        grids = {int(n): np.arange(4 * n + 1) / (4 * n) for n in n_values}
        grid = _union_grid(grids.values())
        W = _bm_batch(seed, ids, grid)
        sched = ab.doob_schedule(self.theta) if self.theta > 0 else None
        out = np.zeros((len(ids), len(n_values)), dtype=bool)
        for col, n in enumerate(n_values):
            v = W[:, _positions(grid, grids[int(n)])]
            sup = np.zeros(len(ids))
            for lag in range(1, 5):
                sup = np.maximum(sup, np.max(np.abs(v[:, lag:] - v[:, :-lag]), axis=1))
            thr = 2.0 * (sched(int(n)) if sched is not None else self.eps)
            out[:, col] = sup >= thr
        return out


@lru_cache(maxsize=8)
def _fbm_dyadic_factor(level: int, hurst: float) -> np.ndarray:
    return fbm_factor(np.arange((1 << level) + 1) / (1 << level), hurst, MAX_DENSE_POINTS)


@dataclass(frozen=True)
class KCDyadic(EventKind):
    """``max_k |X(k/2^n) − X((k−1)/2^n)| > 2^{-γn}`` for Brownian or fractional Brownian ``X``."""

    gamma: float = 0.2
    alpha: float = 4.0
    process: str = "bm"
    hurst: float = 0.5
    name: ClassVar[str] = "kc-dyadic"
    default_range: ClassVar[Tuple[int, int]] = (1, 10)

    def validate_range(self, n_min, n_max):
        super().validate_range(n_min, n_max)
        if self.process not in ("bm", "fbm"):
            raise ConfigError("process must be bm or fbm")
        if self.process == "fbm" and (1 << n_max) + 1 > MAX_DENSE_POINTS:
            raise ResourceLimitError("fBM grid exceeds the dense factorization limit")

    def bound(self):
        params = ab.holder_example(self.process, self.alpha, self.hurst)
        return ab.build_bound("thm3", gamma=self.gamma, **params)

    def evaluate(self, seed, ids, n_values):
        level = int(max(n_values))
        if self.process == "bm":
            X = _dyadic_batch(seed, ids, level)
        else:
            L = _fbm_dyadic_factor(level, self.hurst)
            X = np.zeros((len(ids), (1 << level) + 1))
            X[:, 1:] = _normals(seed, ids, 1 << level) @ L.T
        out = np.zeros((len(ids), len(n_values)), dtype=bool)
        for col, n in enumerate(n_values):
            inc = np.diff(X[:, :: 1 << (level - int(n))], axis=1)
            out[:, col] = np.max(np.abs(inc), axis=1) > 2.0 ** (-self.gamma * n)
        return out


@dataclass(frozen=True)
class TotokiSheet(EventKind):
    """Brownian sheet: ``2^{γn} max |X(x) − X(y)| >= 2^{-δn}`` over level-``n`` lattice neighbours."""

    gamma: float = 0.1
    delta: float = 0.05
    alpha: float = 8.0
    name: ClassVar[str] = "totoki-sheet"
    default_range: ClassVar[Tuple[int, int]] = (1, 8)

    def validate_range(self, n_min, n_max):
        super().validate_range(n_min, n_max)
        if ((1 << n_max) + 1) ** 2 > MAX_SHEET_POINTS:
            raise ResourceLimitError("sheet grid exceeds the point limit")

    def bound(self):
        params = ab.holder_example("sheet", self.alpha)
        return ab.build_bound("thm4", gamma=self.gamma, delta=self.delta, **params)

    def evaluate(self, seed, ids, n_values):
        level = int(max(n_values))
        m = 1 << level
        t = np.arange(m + 1) / m
        z = _normals(seed, ids, m * m)
        out = np.zeros((len(ids), len(n_values)), dtype=bool)
        for row in range(len(ids)):
            X = sheet_from_normals(t, t, z[row])
            for col, n in enumerate(n_values):
                Y = X[:: 1 << (level - int(n)), :: 1 << (level - int(n))]
                d = max(np.max(np.abs(np.diff(Y, axis=0))), np.max(np.abs(np.diff(Y, axis=1))))
                out[row, col] = 2.0 ** (self.gamma * n) * d >= 2.0 ** (-self.delta * n)
        return out


def _exp_grid(n: int) -> np.ndarray:
    m = math.ceil(math.exp(n))
    return np.minimum(np.arange(m + 1) / math.exp(n), 1.0)


def _check_exp_range(n_max: int) -> None:
    if math.ceil(math.exp(n_max)) + 1 > MAX_GRID_POINTS:
        raise ResourceLimitError("⌈e^n⌉ grid exceeds 2^20 points; lower n_max")


@dataclass(frozen=True)
class ModulusLower(EventKind):
    """``max_j |ΔW| / μ(e^{-n}) <= √(1−θ)`` on the grid ``j/e^n ∧ 1``."""

    theta: float = 0.5
    eta: float = 0.25
    p: float = 0.2
    K1: float = 1.0
    name: ClassVar[str] = "modulus-lower"
    default_range: ClassVar[Tuple[int, int]] = (1, 9)

    def validate_range(self, n_min, n_max):
        super().validate_range(n_min, n_max)
        _check_exp_range(n_max)

    def bound(self):
        return ab.build_bound("thm5-lower", theta=self.theta, eta=self.eta, p=self.p, K1=self.K1)

    def evaluate(self, seed, ids, n_values):
        grids = {int(n): _exp_grid(int(n)) for n in n_values}
        grid = _union_grid(grids.values())
        W = _bm_batch(seed, ids, grid)
        out = np.zeros((len(ids), len(n_values)), dtype=bool)
        for col, n in enumerate(n_values):
            v = W[:, _positions(grid, np.unique(grids[int(n)]))]
            stat = np.max(np.abs(np.diff(v, axis=1)), axis=1) / ab.modulus(math.exp(-n))
            out[:, col] = stat <= math.sqrt(1.0 - self.theta)
        return out


@dataclass(frozen=True)
class ModulusUpper(EventKind):
    """``max |W_j − W_i| / μ((j−i)e^{-n}) >= 1+ε`` over ``1 <= j−i <= ⌈e^{nθ}⌉`` on the ``e^{-n}`` grid."""

    theta: float = 0.2
    eps: float = 1.0
    name: ClassVar[str] = "modulus-upper"
    default_range: ClassVar[Tuple[int, int]] = (2, 9)

    def n_range(self):
        return (math.ceil(1.0 / (1.0 - self.theta)), 9)

    def validate_range(self, n_min, n_max):
        super().validate_range(n_min, n_max)
        if n_min < 1.0 / (1.0 - self.theta):
            raise ConfigError("n_min must be >= 1/(1−θ)")
        _check_exp_range(n_max)

    def bound(self):
        return ab.build_bound("thm5-upper", theta=self.theta, eps=self.eps)

    def evaluate(self, seed, ids, n_values):
        grids = {int(n): _exp_grid(int(n)) for n in n_values}
        grid = _union_grid(grids.values())
        W = _bm_batch(seed, ids, grid)
        out = np.zeros((len(ids), len(n_values)), dtype=bool)
        for col, n in enumerate(n_values):
            g = grids[int(n)]
            v = W[:, _positions(grid, np.unique(g))]
            stat = np.zeros(len(ids))
            for lag in range(1, math.ceil(math.exp(n * self.theta)) + 1):
                if lag >= v.shape[1]:
                    break
                ratio = np.abs(v[:, lag:] - v[:, :-lag]) / ab.modulus(lag * math.exp(-n))
                stat = np.maximum(stat, np.max(ratio, axis=1))
            out[:, col] = stat >= 1.0 + self.eps
        return out


@dataclass(frozen=True)
class PWZ(EventKind):
    """``∃ s``: ``sup_{|t−s|<=2^{-n}} |W(s) − W(t)| <= b^n 2^{-n}``, with ``s, t`` on a refined dyadic grid."""

    b: float = 1.1
    refine: int = 4
    name: ClassVar[str] = "pwz"
    default_range: ClassVar[Tuple[int, int]] = (1, 8)

    def validate_range(self, n_min, n_max):
        super().validate_range(n_min, n_max)
        check_level(n_max + self.refine)

    def bound(self):
        return ab.build_bound("thm6", b=self.b)

    def notes(self):
        return (f"existential event checked over s, t on the level n+{self.refine} dyadic grid",)

    def evaluate(self, seed, ids, n_values):
        level = int(max(n_values)) + self.refine
        W = _dyadic_batch(seed, ids, level)
        out = np.zeros((len(ids), len(n_values)), dtype=bool)
        for col, n in enumerate(n_values):
            n = int(n)
            step = 1 << (level - n - self.refine)
            v = W[:, ::step]
            width = 2 * (1 << self.refine) + 1
            hi = maximum_filter1d(v, width, axis=1, mode="nearest")
            lo = minimum_filter1d(v, width, axis=1, mode="nearest")
            osc = np.maximum(hi - v, v - lo)
            out[:, col] = np.min(osc, axis=1) <= self.b ** n * 2.0 ** (-n)
        return out


@dataclass(frozen=True)
class Monotone(EventKind):
    """All ``n`` increments of ``W`` on the grid ``i/n`` are non-negative."""

    name: ClassVar[str] = "monotone"
    default_range: ClassVar[Tuple[int, int]] = (1, 20)

    def validate_range(self, n_min, n_max):
        super().validate_range(n_min, n_max)
        if n_min < 1:
            raise ConfigError("n_min must be >= 1")

    def bound(self):
        return ab.build_bound("thm7")

    def evaluate(self, seed, ids, n_values):
        points = sorted({Fraction(i, int(n)) for n in n_values for i in range(int(n) + 1)})
        grid = np.array([float(f) for f in points])
        W = _bm_batch(seed, ids, grid)
        out = np.zeros((len(ids), len(n_values)), dtype=bool)
        for col, n in enumerate(n_values):
            v = W[:, _positions(grid, np.arange(int(n) + 1) / int(n))]
            out[:, col] = np.all(np.diff(v, axis=1) >= 0, axis=1)
        return out


@dataclass(frozen=True)
class QV(EventKind):
    """``|Σ_{i<2^n} (ΔW)² − t| > ε`` on the dyadic partition of ``[0, t]``.

    ``scheme`` selects the bound: ``dyadic`` (Chebyshev), ``dyadic-sharp``
    (sharpened variance) or ``schedule`` (``ε_n = t√(2 n^θ 2^{-n})``).
    """

    t: float = 1.0
    eps: float = 0.5
    scheme: str = "dyadic"
    theta: float = 2.0
    name: ClassVar[str] = "qv"
    default_range: ClassVar[Tuple[int, int]] = (1, 12)

    def validate_range(self, n_min, n_max):
        super().validate_range(n_min, n_max)
        if self.scheme not in ("dyadic", "dyadic-sharp", "schedule"):
            raise ConfigError("scheme must be dyadic, dyadic-sharp or schedule")
        check_level(n_max)

    def bound(self):
        if self.scheme == "schedule":
            return ab.build_bound("thm8-schedule", t=self.t, theta=self.theta)
        return ab.build_bound("ex4" if self.scheme == "dyadic" else "ex4-sharp", t=self.t, eps=self.eps)

    def threshold(self, n: int) -> float:
        if self.scheme == "schedule":
            return self.t * math.sqrt(2.0 * n ** self.theta * 2.0 ** (-n))
        return self.eps

    def evaluate(self, seed, ids, n_values):
        level = int(max(n_values))
        W = _dyadic_batch(seed, ids, level, self.t)
        out = np.zeros((len(ids), len(n_values)), dtype=bool)
        for col, n in enumerate(n_values):
            inc = np.diff(W[:, :: 1 << (level - int(n))], axis=1)
            out[:, col] = np.abs(np.sum(inc * inc, axis=1) - self.t) > self.threshold(int(n))
        return out


@dataclass(frozen=True)
class Khinchin(EventKind):
    """``sup_{θ^{n+1} < s <= θ^n} W_s / √(2s ln ln(1/s)) > (1+δ/2)√θ`` on ``m_ref`` points per bracket."""

    theta: float = 0.25
    delta: float = 2.0
    m_ref: int = 128
    name: ClassVar[str] = "khinchin"
    default_range: ClassVar[Tuple[int, int]] = (1, 12)

    def validate_range(self, n_min, n_max):
        super().validate_range(n_min, n_max)
        if not self.theta ** n_min < 1.0 / math.e:
            raise ConfigError("brackets must lie below 1/e: raise n_min")

    def bound(self):
        return ab.build_bound("thm10", delta=self.delta, theta=self.theta)

    def notes(self):
        return (f"bracket supremum taken over {self.m_ref} grid points (underestimates the event)",)

    def brackets(self, n_values) -> Dict[int, np.ndarray]:
        frac = np.arange(1, self.m_ref + 1) / self.m_ref
        return {int(n): self.theta ** (n + 1) + (self.theta ** n - self.theta ** (n + 1)) * frac
                for n in n_values}

    def evaluate(self, seed, ids, n_values):
        br = self.brackets(n_values)
        grid = _union_grid(br.values())
        W = _bm_batch(seed, ids, grid)
        thr = (1.0 + self.delta / 2.0) * math.sqrt(self.theta)
        out = np.zeros((len(ids), len(n_values)), dtype=bool)
        for col, n in enumerate(n_values):
            s = br[int(n)]
            stat = np.max(W[:, _positions(grid, s)] / ab.lil_envelope(s), axis=1)
            out[:, col] = stat > thr
        return out


@dataclass(frozen=True)
class Chung(EventKind):
    """``sup_{[0,q^n]} |W| < (1−ε)(π/√8)√(q^n / ln ln q^n)`` with ``m_ref`` points per ``(q^{n−1}, q^n]``."""

    q: float = 4.0
    eps: float = 0.5
    p: float = 0.5
    m_ref: int = 256
    name: ClassVar[str] = "chung"
    default_range: ClassVar[Tuple[int, int]] = (1, 12)

    def validate_range(self, n_min, n_max):
        super().validate_range(n_min, n_max)
        if not self.q ** n_min > math.e:
            raise ConfigError("q^n_min must exceed e")

    def bound(self):
        return ab.build_bound("thm11", q=self.q, eps=self.eps, p=self.p)

    def notes(self):
        return ("grid running maximum underestimates the supremum, so the event frequency is overstated",)

    def evaluate(self, seed, ids, n_values):
        lo_n, hi_n = int(min(n_values)), int(max(n_values))
        frac = np.arange(1, self.m_ref + 1) / self.m_ref
        parts = [self.q ** (lo_n - 1) * frac]
        parts += [self.q ** (m - 1) + (self.q ** m - self.q ** (m - 1)) * frac for m in range(lo_n, hi_n + 1)]
        grid = _union_grid(parts)
        W = _bm_batch(seed, ids, grid)
        running = np.maximum.accumulate(np.abs(W), axis=1)
        out = np.zeros((len(ids), len(n_values)), dtype=bool)
        for col, n in enumerate(n_values):
            T = self.q ** int(n)
            idx = _positions(grid, np.array([parts[int(n) - lo_n + 1][-1]]))[0]
            thr = (1.0 - self.eps) * math.pi / math.sqrt(8.0) * ab.chung_scale(T)
            out[:, col] = running[:, idx] < thr
        return out


@dataclass(frozen=True)
class KolmogorovTest(EventKind):
    """``sup_{t ∈ (0, base^{-n})} W_t / t^{1/2+ε} >= 1`` for the nested windows ``b_n = base^{-n}``.

    The supremum is taken over ``m_ref`` points per bracket down to
    ``base^{-(n_max+1)}``; the count equals the last firing index.
    """

    eps: float = 0.25
    base: float = 4.0
    m_ref: int = 64
    name: ClassVar[str] = "kolmogorov-test"
    default_range: ClassVar[Tuple[int, int]] = (1, 12)

    def bound(self):
        return ab.build_bound("ex8", eps=self.eps)

    def notes(self):
        return ("windows truncated below base^-(n_max+1); nesting gives count = last firing index",)

    def evaluate(self, seed, ids, n_values):
        frac = np.arange(1, self.m_ref + 1) / self.m_ref
        lo_n, hi_n = int(min(n_values)), int(max(n_values))
        br = {m: self.base ** -(m + 1) + (self.base ** -m - self.base ** -(m + 1)) * frac
              for m in range(lo_n, hi_n + 1)}
        grid = _union_grid(br.values())
        W = _bm_batch(seed, ids, grid)
        fire = np.zeros((len(ids), hi_n - lo_n + 1), dtype=bool)
        for m, s in br.items():
            fire[:, m - lo_n] = np.max(W[:, _positions(grid, s)] / s ** (0.5 + self.eps), axis=1) >= 1.0
        # Window n covers every bracket m >= n.
        nested = np.flip(np.logical_or.accumulate(np.flip(fire, axis=1), axis=1), axis=1)
        return nested[:, np.asarray(n_values) - lo_n]


@dataclass(frozen=True)
class Strassen(EventKind):
    """``d(Z_{q^n}, K(½+η)) > ε`` with ``Z_s`` sampled on ``points`` uniform points of ``[0, 1]``.

    Uses ``d > ε`` iff the minimal energy in the ``ε``-tube exceeds ``½+η``.
    """

    eta: float = 1.0
    eps: float = 1.0
    q: float = math.e
    vartheta: float = 0.9
    p: float = 0.5
    points: int = 1025
    name: ClassVar[str] = "strassen"
    default_range: ClassVar[Tuple[int, int]] = (2, 10)

    def validate_range(self, n_min, n_max):
        super().validate_range(n_min, n_max)
        if not self.q ** n_min > math.e:
            raise ConfigError("q^n_min must exceed e")

    def bound(self):
        return ab.build_bound("thm13-3a", eta=self.eta, vartheta=self.vartheta, p=self.p, q=self.q, eps=self.eps)

    def notes(self):
        return ("discrete energy on the sample grid stands in for the Dirichlet energy",)

    def evaluate(self, seed, ids, n_values):
        unit = np.arange(self.points) / (self.points - 1)
        grids = {int(n): self.q ** int(n) * unit for n in n_values}
        grid = _union_grid(grids.values())
        W = _bm_batch(seed, ids, grid)
        r = 0.5 + self.eta
        out = np.zeros((len(ids), len(n_values)), dtype=bool)
        for col, n in enumerate(n_values):
            s = self.q ** int(n)
            idx = _positions(grid, grids[int(n)])
            scale = math.sqrt(2.0 * s * math.log(math.log(s)))
            for row in range(len(ids)):
                Z = W[row, idx] / scale
                out[row, col] = min_energy_in_tube((unit, Z), self.eps) > r + ENERGY_SLACK
        return out


KIND_REGISTRY: Dict[str, type] = {
    cls.name: cls
    for cls in (LevyOverlap, LevyStep, Doob, KCDyadic, TotokiSheet, ModulusLower, ModulusUpper, PWZ,
                Monotone, QV, Khinchin, Chung, KolmogorovTest, Strassen)
}


def make_kind(name: str, **params) -> EventKind:
    """Instantiate a registered kind, coercing string parameters to the field types."""
    if name not in KIND_REGISTRY:
        raise ConfigError(f"unknown event kind {name!r}; known: {', '.join(sorted(KIND_REGISTRY))}")
    cls = KIND_REGISTRY[name]
    fields = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in params.items():
        if key not in fields:
            raise ConfigError(f"{name}: unknown parameter {key!r}")
        default = fields[key].default
        try:
            kwargs[key] = type(default)(value) if not isinstance(default, str) else str(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{name}: bad value for {key}: {value!r}") from exc
    return cls(**kwargs)


# ---------------------------------------------------------------------------
# Monte Carlo driver
# ---------------------------------------------------------------------------


@dataclass
class ExperimentConfig:
    """Monte Carlo settings for one event kind.

    Attributes:
        kind: Event schedule.
        n_range: Inclusive index window ``(n_min, n_max)``; defaults to the kind's.
        samples: Number of independent paths.
        seed: Base seed; sample ``i`` uses stream ``(seed, i)``.
        k_max: Largest tabulated count level.
        name: Experiment identifier used in reports.
    """

    kind: EventKind
    n_range: Optional[Tuple[int, int]] = None
    samples: int = 1000
    seed: int = 0
    k_max: int = 10
    name: str = ""

    def __post_init__(self):
        if self.n_range is None:
            self.n_range = self.kind.n_range()
        self.n_range = (int(self.n_range[0]), int(self.n_range[1]))
        if self.samples < 1:
            raise ConfigError("samples must be >= 1")
        if self.k_max < 0:
            raise ConfigError("k_max must be >= 0")
        self.kind.validate_range(*self.n_range)
        if not self.name:
            self.name = self.kind.name

    @property
    def n_values(self) -> np.ndarray:
        return np.arange(self.n_range[0], self.n_range[1] + 1)


@dataclass
class TrialResult:
    """Per-sample overlap counts and, for small runs, the indicator matrix."""

    counts: np.ndarray
    n_values: np.ndarray
    indicators: Optional[np.ndarray] = None

    def event_frequencies(self) -> np.ndarray:
        if self.indicators is None:
            raise DomainError("indicator matrix was not retained")
        return self.indicators.mean(axis=0)


def generate_events(kind: EventKind, seed: int, sample_ids: Sequence[int], n_range: Tuple[int, int]) -> np.ndarray:
    """Indicator matrix ``(len(sample_ids), n_max − n_min + 1)`` for the given samples."""
    kind.validate_range(*n_range)
    n_values = np.arange(n_range[0], n_range[1] + 1)
    return kind.evaluate(int(seed), [int(i) for i in sample_ids], n_values)


def _run_chunk(args) -> np.ndarray:
    kind, seed, lo, hi, n_range = args
    return generate_events(kind, seed, range(lo, hi), n_range)


def resolve_workers(workers: Optional[int] = None) -> int:
    """Explicit value, else ``DEVFREQ_WORKERS``, else 1."""
    if workers is None:
        env = os.environ.get("DEVFREQ_WORKERS")
        workers = int(env) if env else 1
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    return workers


def run_trials(config: ExperimentConfig, workers: Optional[int] = None,
               diagnostics_cap: int = DIAGNOSTICS_CAP) -> TrialResult:
    """Evaluate all samples in fixed-size chunks, optionally across processes."""
    workers = resolve_workers(workers)
    tasks = [(config.kind, config.seed, lo, min(lo + CHUNK, config.samples), config.n_range)
             for lo in range(0, config.samples, CHUNK)]
    if workers == 1 or len(tasks) == 1:
        blocks = [_run_chunk(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(_run_chunk, tasks))
    ind = np.concatenate(blocks, axis=0)
    counts = config.kind.count(ind)
    return TrialResult(counts, config.n_values, ind if config.samples <= diagnostics_cap else None)


def estimate_overlap_tail(config: ExperimentConfig, workers: Optional[int] = None) -> OverlapTail:
    """Empirical ``P(O >= k)`` for ``k = 0..k_max``.

    Counts only cover ``n_range``, so they are lower bounds for the full
    overlap count and a check ``empirical <= bound`` stays sound.
    """
    trials = run_trials(config, workers)
    notes = (f"events counted for n in [{config.n_range[0]}, {config.n_range[1]}]",) + config.kind.notes()
    return OverlapTail.from_counts(config.name, trials.counts, config.k_max, notes)
