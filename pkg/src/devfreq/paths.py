"""Brownian path constructions on explicit grids.

All samplers draw their Gaussian inputs from a :class:`GaussianCoefficients`
store, a counter-based stream keyed by ``(seed, stream_id)``.  Index ``n`` of a
stream always maps to the same normal variate, so coefficients can be re-read
at any truncation level and paths are reproducible regardless of how the work
is split between processes.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from numpy.random import Philox
from scipy.special import ndtri

from .errors import DomainError, ResourceLimitError

# Desk-scale budgets; callers may pass their own limits.
MAX_DENSE_POINTS = 4096
MAX_SHEET_POINTS = 1 << 22
MAX_DYADIC_LEVEL = 24

_U53 = 2.0 ** -53
_MASK64 = (1 << 64) - 1


def _raw_to_normal(raw: np.ndarray) -> np.ndarray:
    # 53-bit midpoint uniforms never hit 0 or 1, so ndtri stays finite.
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _U53
    return ndtri(u)


def _philox(seed: int, stream_id: int) -> Philox:
    key = np.array([int(seed) & _MASK64, int(stream_id) & _MASK64], dtype=np.uint64)
    return Philox(key=key)


def raw_normals(seed: int, stream_id: int, start: int, count: int) -> np.ndarray:
    """Return normals with indices ``start .. start+count-1`` of one stream.

    Args:
        seed: 64-bit seed.
        stream_id: Stream identifier (e.g. the Monte Carlo sample index).
        start: First index, ``>= 0``.
        count: Number of values.
    """
    if start < 0 or count < 0:
        raise DomainError("start and count must be non-negative")
    if count == 0:
        return np.empty(0)
    bg = _philox(seed, stream_id)
    # Philox emits four 64-bit words per counter step.
    bg.advance(start // 4)
    skip = start % 4
    raw = bg.random_raw(skip + count)[skip:]
    return _raw_to_normal(raw)


def normal_block(seed: int, stream_ids: Sequence[int], start: int, count: int) -> np.ndarray:
    """Stack :func:`raw_normals` for several streams into a ``(len(ids), count)`` array."""
    out = np.empty((len(stream_ids), count))
    for row, sid in enumerate(stream_ids):
        out[row] = raw_normals(seed, sid, start, count)
    return out


class GaussianCoefficients:
    """Random-access i.i.d. standard normal sequence ``z[0], z[1], ...``.

    Values are a pure function of ``(seed, stream_id, index)``; the object
    holds no mutable state and can be shared between threads or pickled to
    worker processes.

    Args:
        seed: 64-bit integer seed.
        stream_id: Independent stream selector.
    """

    def __init__(self, seed: int = 0, stream_id: int = 0):
        self.seed = int(seed)
        self.stream_id = int(stream_id)

    def take(self, start: int, count: int) -> np.ndarray:
        return raw_normals(self.seed, self.stream_id, start, count)

    def __getitem__(self, idx: Union[int, slice]):
        if isinstance(idx, slice):
            start = 0 if idx.start is None else idx.start
            if idx.stop is None or idx.stop < start or start < 0:
                raise DomainError("coefficient slices need 0 <= start <= stop")
            vals = self.take(start, idx.stop - start)
            return vals[:: idx.step] if idx.step else vals
        if idx < 0:
            raise DomainError("coefficient index must be >= 0")
        return float(self.take(int(idx), 1)[0])

    def __repr__(self) -> str:
        return f"GaussianCoefficients(seed={self.seed}, stream_id={self.stream_id})"


class ExplicitCoefficients(GaussianCoefficients):
    """Fixed coefficient values, zero beyond the supplied prefix.

    Handy for hand-checkable examples such as ``z[0] = 1`` and all others 0.
    """

    def __init__(self, values: Sequence[float]):
        super().__init__(seed=0, stream_id=0)
        self.values = np.asarray(values, dtype=float)

    def take(self, start: int, count: int) -> np.ndarray:
        out = np.zeros(count)
        lo, hi = start, min(start + count, len(self.values))
        if hi > lo:
            out[: hi - lo] = self.values[lo:hi]
        return out

    def __repr__(self) -> str:
        return f"ExplicitCoefficients({self.values.tolist()!r})"


@dataclass(frozen=True)
class PathOnGrid:
    """Sampled process values on an explicit time grid.

    Attributes:
        times: Strictly increasing grid in ``[0, T]``.
        values: Process values, same length as ``times``.
        grid_kind: ``"dyadic"``, ``"uniform"`` or ``"explicit"``.
        level: Dyadic level or number of uniform steps, if applicable.
    """

    times: np.ndarray
    values: np.ndarray
    grid_kind: str = "explicit"
    level: Optional[int] = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if len(self.times) != len(self.values):
            raise DomainError("times and values must have equal length")

    def __len__(self) -> int:
        return len(self.times)

    def to_csv(self, fh=None) -> str:
        """Write ``t,value`` rows; returns the text when ``fh`` is None."""
        buf = io.StringIO() if fh is None else fh
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "value"])
        for t, v in zip(self.times, self.values):
            w.writerow([repr(float(t)), repr(float(v))])
        return buf.getvalue() if fh is None else ""


def dyadic_grid(J: int) -> np.ndarray:
    """Points ``k / 2**J`` for ``k = 0 .. 2**J``."""
    return np.arange((1 << J) + 1) / float(1 << J)


def _check_unit_grid(grid) -> np.ndarray:
    t = np.asarray(grid, dtype=float)
    if t.size and (t.min() < 0.0 or t.max() > 1.0):
        raise DomainError("grid points must lie in [0, 1]")
    return t


def tent(x):
    """Mother tent: ``2x`` on [0, 1/2], ``2(1-x)`` on (1/2, 1], zero elsewhere."""
    x = np.asarray(x, dtype=float)
    return np.where((x < 0) | (x > 1), 0.0, np.where(x <= 0.5, 2 * x, 2 * (1 - x)))


def level_of(n: int) -> int:
    """Return ``j`` with ``n = 2**j + k``, ``0 <= k < 2**j``."""
    if n < 1:
        raise DomainError("Schauder index must be >= 1")
    return int(n).bit_length() - 1


def schauder_scale(n: int) -> float:
    """Coefficient scale ``2**(-j/2 - 1)`` for ``n = 2**j + k``; the n=0 term has scale 1."""
    if n == 0:
        return 1.0
    return 2.0 ** (-level_of(n) / 2.0 - 1.0)


def schauder_eval(n: int, t):
    """Evaluate the Schauder tent ``H(2**j t - k)`` for ``n = 2**j + k``.

    Args:
        n: Index ``>= 1``.
        t: Scalar or array in ``[0, 1]``.
    """
    j = level_of(n)
    k = n - (1 << j)
    t_arr = _check_unit_grid(t)
    out = tent((1 << j) * t_arr - k)
    return float(out) if np.ndim(t) == 0 else out


def levy_partial(Z: GaussianCoefficients, J: int, grid) -> PathOnGrid:
    """Lévy–Schauder partial sum through generation ``J``.

    Uses the terms ``n = 0 .. 2**J - 1``: ``Z_0 t`` plus every tent up to
    dyadic level ``J - 1``.  The result interpolates the level-``J`` dyadic
    values linearly.  Evaluation is direct: at each level exactly one tent can
    be nonzero at a given ``t``.

    Args:
        Z: Coefficient store.
        J: Generation, ``>= 0``.
        grid: Evaluation points in ``[0, 1]``.
    """
    if J < 0:
        raise DomainError("J must be >= 0")
    t = _check_unit_grid(grid)
    n_terms = 1 << J
    z = Z.take(0, n_terms)
    vals = z[0] * t
    for j in range(J):
        m = 1 << j
        k = np.minimum(np.floor(m * t).astype(np.int64), m - 1)
        vals = vals + 2.0 ** (-j / 2.0 - 1.0) * z[m + k] * tent(m * t - k)
    return PathOnGrid(t, vals, "explicit")


def check_level(J: int, max_level: int = MAX_DYADIC_LEVEL) -> None:
    if J < 0:
        raise DomainError("J must be >= 0")
    if J > max_level:
        raise ResourceLimitError(f"dyadic level {J} exceeds budget {max_level}")


def midpoint_displacement(z: np.ndarray, J: int) -> np.ndarray:
    """Values at ``k / 2**J`` from Lévy-ordered coefficients.

    Args:
        z: Array whose last axis holds ``Z_0 .. Z_{2**J - 1}``; leading axes
            are batch dimensions.
        J: Target level.

    Returns:
        Array with last axis of length ``2**J + 1``.
    """
    z = np.asarray(z, dtype=float)
    size = 1 << J
    out = np.zeros(z.shape[:-1] + (size + 1,))
    out[..., size] = z[..., 0]
    for j in range(J):
        m = 1 << j
        stride = size >> j
        half = stride >> 1
        left = out[..., 0:size:stride]
        right = out[..., stride : size + 1 : stride]
        out[..., half:size:stride] = 0.5 * (left + right) + 2.0 ** (-j / 2.0 - 1.0) * z[..., m : 2 * m]
    return out


def levy_exact_dyadic(Z: GaussianCoefficients, J: int, max_level: int = MAX_DYADIC_LEVEL) -> PathOnGrid:
    """Level-``J`` dyadic values of the Lévy construction by midpoint displacement.

    Each new midpoint is the average of its two neighbours plus
    ``λ_n Z_n`` with ``λ_n = 2**(-j/2 - 1)``.
    """
    check_level(J, max_level)
    vals = midpoint_displacement(Z.take(0, 1 << J), J)
    return PathOnGrid(dyadic_grid(J), vals, "dyadic", J)


def generation_sup_norm(Z: GaussianCoefficients, j: int) -> float:
    """``max |λ_n Z_n|`` over generation ``j`` (``n = 2**(j-1) .. 2**j - 1``).

    Equals ``||L^j - L^{j-1}||_∞`` because the tents of one generation have
    disjoint supports and unit peaks.
    """
    if j < 1:
        raise DomainError("generation index must be >= 1")
    m = 1 << (j - 1)
    return float(np.max(np.abs(Z.take(m, m))) * 2.0 ** (-(j - 1) / 2.0 - 1.0))


def wiener_partial(Z: GaussianCoefficients, K: int, grid) -> PathOnGrid:
    """Fourier partial sum ``sum_{k=1}^K sin(kπt)/k · Z_k``."""
    if K < 1:
        raise DomainError("K must be >= 1")
    t = _check_unit_grid(grid)
    k = np.arange(1, K + 1)
    z = Z.take(1, K)
    vals = np.sin(np.pi * np.outer(t, k)) @ (z / k)
    return PathOnGrid(t, vals, "explicit")


def kkl_partial(Z: GaussianCoefficients, N: int, grid, first_index: int = 0) -> PathOnGrid:
    """Sine-series partial sum ``(√2/π) Σ sin((k-½)πt)/(k-½) · Z_k``.

    The displayed sum starts at ``k = 0``, whose mode coincides with the
    ``k = 1`` mode.  Pass ``first_index=1`` for the standard eigen-expansion
    of Brownian motion on [0, 1].

    Args:
        Z: Coefficient store.
        N: Last index, ``>= 0``.
        grid: Points in ``[0, 1]``.
        first_index: 0 (as displayed) or 1.
    """
    if N < 0 or first_index not in (0, 1):
        raise DomainError("need N >= 0 and first_index in {0, 1}")
    t = _check_unit_grid(grid)
    if N < first_index:
        return PathOnGrid(t, np.zeros_like(t), "explicit")
    k = np.arange(first_index, N + 1) - 0.5
    z = Z.take(first_index, N + 1 - first_index)
    vals = (np.sqrt(2.0) / np.pi) * (np.sin(np.pi * np.outer(t, k)) @ (z / k))
    return PathOnGrid(t, vals, "explicit")


def _check_increasing(grid) -> np.ndarray:
    t = np.asarray(grid, dtype=float)
    if t.ndim != 1 or t.size == 0 or t[0] != 0.0:
        raise DomainError("grid must be a 1-d array starting at 0")
    if np.any(np.diff(t) <= 0):
        raise DomainError("grid must be strictly increasing")
    return t


def bm_from_normals(grid: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Cumulative Brownian values from increment normals (batched on leading axes)."""
    dt = np.diff(grid)
    out = np.zeros(z.shape[:-1] + (len(grid),))
    np.cumsum(np.sqrt(dt) * z, axis=-1, out=out[..., 1:])
    return out


def sample_bm(grid, Z: GaussianCoefficients) -> PathOnGrid:
    """Exact Brownian motion on an arbitrary grid via independent increments.

    ``W(t_{i+1}) = W(t_i) + sqrt(t_{i+1} - t_i) · z[i]``.
    """
    t = _check_increasing(grid)
    vals = bm_from_normals(t, Z.take(0, len(t) - 1))
    return PathOnGrid(t, vals, "explicit")


def fbm_covariance(t: np.ndarray, hurst: float) -> np.ndarray:
    s, u = np.meshgrid(t, t, indexing="ij")
    h2 = 2.0 * hurst
    return 0.5 * (np.abs(s) ** h2 + np.abs(u) ** h2 - np.abs(s - u) ** h2)


def fbm_factor(grid, hurst: float, max_points: int = MAX_DENSE_POINTS, jitter: float = 0.0) -> np.ndarray:
    """Lower Cholesky factor of the fBM covariance on the positive grid points.

    Raises:
        ResourceLimitError: grid larger than ``max_points``.
        DomainError: factorization failed; the message suggests a jitter.
    """
    if not 0.0 < hurst < 1.0:
        raise DomainError("Hurst index must lie in (0, 1)")
    t = _check_increasing(grid)
    if len(t) > max_points:
        raise ResourceLimitError(f"{len(t)} grid points exceed dense limit {max_points}")
    cov = fbm_covariance(t[1:], hurst)
    if jitter:
        cov = cov + jitter * np.eye(len(cov))
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        scale = float(np.max(np.diag(cov))) if cov.size else 1.0
        raise DomainError(
            f"covariance not positive definite; retry with jitter={1e-12 * scale:.1e}"
        ) from exc


def sample_fbm(grid, hurst: float, Z: GaussianCoefficients, max_points: int = MAX_DENSE_POINTS,
               jitter: float = 0.0) -> PathOnGrid:
    """Fractional Brownian motion on ``grid`` by dense Cholesky factorization."""
    t = _check_increasing(grid)
    L = fbm_factor(t, hurst, max_points, jitter)
    vals = np.zeros(len(t))
    vals[1:] = L @ Z.take(0, len(t) - 1)
    return PathOnGrid(t, vals, "explicit", meta={"hurst": hurst})


def sample_sheet(t_grid, s_grid, Z: GaussianCoefficients, max_points: int = MAX_SHEET_POINTS) -> np.ndarray:
    """Brownian sheet on a product grid from i.i.d. cell increments.

    Returns an array ``X[i, j] = X(t_i, s_j)`` with ``Cov = min(t,t')·min(s,s')``.
    """
    t = _check_increasing(t_grid)
    s = _check_increasing(s_grid)
    if len(t) * len(s) > max_points:
        raise ResourceLimitError(f"{len(t)}x{len(s)} sheet exceeds limit {max_points}")
    return sheet_from_normals(t, s, Z.take(0, (len(t) - 1) * (len(s) - 1)))


def sheet_from_normals(t: np.ndarray, s: np.ndarray, z: np.ndarray) -> np.ndarray:
    m, n = len(t) - 1, len(s) - 1
    area = np.sqrt(np.outer(np.diff(t), np.diff(s)))
    cells = area * np.asarray(z).reshape(m, n)
    out = np.zeros((m + 1, n + 1))
    out[1:, 1:] = cells.cumsum(axis=0).cumsum(axis=1)
    return out


def sup_distance(a: PathOnGrid, b: PathOnGrid) -> float:
    """``max_i |a_i - b_i|`` over a shared grid."""
    if len(a.times) != len(b.times) or not np.array_equal(a.times, b.times):
        raise DomainError("paths live on different grids")
    if len(a.values) == 0:
        return 0.0
    return float(np.max(np.abs(np.asarray(a.values) - np.asarray(b.values))))
