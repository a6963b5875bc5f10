"""Quantitative Borel–Cantelli tools.

Overlap counts ``O = Σ 1(A_n)``, weighted moment bounds ``E[S_a(O)] <= K_a``,
exponential-moment bounds for geometrically decaying and independent events,
and the last-entry distribution of independent event sequences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import optimize

from .analytic_bounds import BoundSpec
from .errors import DomainError, HypothesisViolation


@dataclass(frozen=True)
class WeightSequence:
    """Positive weights ``a_n`` for ``n >= 1``.

    Attributes:
        kind: ``"power"`` (``a_n = n^p``), ``"exponential"`` (``a_n = e^{rn}``)
            or ``"custom"``.
        param: Exponent ``p`` or rate ``r``.
        func: Evaluator for ``"custom"`` weights.
    """

    kind: str = "power"
    param: float = 0.0
    func: Optional[Callable[[int], float]] = None

    @classmethod
    def power(cls, p: float) -> "WeightSequence":
        return cls("power", float(p))

    @classmethod
    def exponential(cls, r: float) -> "WeightSequence":
        return cls("exponential", float(r))

    @classmethod
    def custom(cls, func: Callable[[int], float]) -> "WeightSequence":
        return cls("custom", 0.0, func)

    def __call__(self, n):
        n_arr = np.asarray(n, dtype=float)
        if self.kind == "power":
            out = n_arr ** self.param
        elif self.kind == "exponential":
            out = np.exp(self.param * n_arr)
        elif self.kind == "custom":
            out = np.array([float(self.func(int(v))) for v in np.atleast_1d(n_arr)]).reshape(n_arr.shape)
        else:
            raise DomainError(f"unknown weight kind {self.kind!r}")
        return float(out) if out.ndim == 0 else out


def antiderivative(w: WeightSequence, N: int) -> float:
    """``S_a(N) = Σ_{n=1}^N a_n`` with ``S_a(0) = 0``."""
    if N < 0:
        raise DomainError("N must be >= 0")
    if N == 0:
        return 0.0
    if w.kind == "exponential" and w.param != 0.0:
        r = w.param
        return math.exp(r) * math.expm1(r * N) / math.expm1(r)
    return float(math.fsum(np.atleast_1d(w(np.arange(1, N + 1)))))


@dataclass
class MomentBound:
    """Result of :func:`weighted_moment_bound`.

    Attributes:
        K_a: Certified bound on ``E[S_a(O)]``.
        truncated: Finite part of the double series.
        tail_budget: Contribution assigned to indices beyond ``n_max``.
        weights: Weight sequence used.
    """

    K_a: float
    truncated: float
    tail_budget: float
    weights: WeightSequence

    def tail(self, k: int) -> float:
        """Markov bound ``P(O >= k) <= K_a / S_a(k)``."""
        if k < 1:
            raise DomainError("k must be >= 1")
        return self.K_a / antiderivative(self.weights, k)

    def as_bound(self, name: str = "lemma1") -> BoundSpec:
        return BoundSpec(name, {"K_a": self.K_a, "tail_budget": self.tail_budget}, self.tail, 1)


def weighted_moment_bound(prob: Callable[[int], float], w: WeightSequence, n_max: int,
                          tail_budget: Optional[float] = None, rel_tol: float = 1e-12,
                          scan_cap: int = 10 ** 6) -> MomentBound:
    """``K_a = Σ_n a_n Σ_{m>=n} P(A_m)``, evaluated as ``Σ_m P(A_m) S_a(m)``.

    Args:
        prob: Upper bounds ``m -> P(A_m)``.
        w: Weights.
        n_max: Last index summed exactly.
        tail_budget: Caller-certified bound on ``Σ_{m>n_max} P(A_m) S_a(m)``.
            When omitted the series is continued until its terms fall below
            ``rel_tol`` of the running total; the remainder is then estimated
            from the observed geometric or power-law decay.

    Raises:
        HypothesisViolation: the automatic tail scan did not converge.
    """
    if n_max < 0:
        raise DomainError("n_max must be >= 0")
    S = 0.0
    trunc = 0.0
    for m in range(1, n_max + 1):
        S += w(m)
        trunc += prob(m) * S
    if tail_budget is not None:
        if tail_budget < 0:
            raise DomainError("tail_budget must be non-negative")
        return MomentBound(trunc + tail_budget, trunc, float(tail_budget), w)
    tail = 0.0
    prev = math.inf
    m = n_max
    while True:
        m += 1
        if m - n_max > scan_cap:
            raise HypothesisViolation("K_a < ∞", "tail scan did not converge; supply tail_budget")
        S += w(m)
        term = prob(m) * S
        tail += term
        if term == 0.0 or (term <= rel_tol * (trunc + tail) and prev not in (0.0, math.inf)):
            break
        prev = term
    if term > 0.0:
        ratio = term / prev
        if ratio < 0.9:
            # Geometric decay: bound the remainder by a geometric series.
            tail += term * ratio / (1.0 - ratio)
        else:
            # Power-law decay term ~ C m^{-alpha}: remainder ~ term m / (alpha - 1).
            alpha = -math.log(ratio) / math.log(m / (m - 1.0))
            if alpha <= 1.0:
                raise HypothesisViolation("K_a < ∞", f"terms decay like m^-{alpha:.3g}")
            tail += term * m / (alpha - 1.0)
    return MomentBound(trunc + tail, trunc, tail, w)


def riemann_example_bound(c: float, q: float, p: float) -> float:
    """``c q ζ(q−p−1)`` for ``P(A_n) <= c n^{-q}`` and weights ``n^p``, ``0 < p < q−2``."""
    from .analytic_bounds import zeta

    if not 0 < p < q - 2:
        raise HypothesisViolation("0 < p < q − 2")
    return c * q * zeta(q - p - 1)


def exp_moment_bound(M: float, b: float, p: float, n0: int = 1) -> float:
    """``1 + M b^{n0-1} / (1 - e^p b)`` bounding ``E[e^{pO}]`` when ``P(A_m) <= M b^m``, ``m >= n0``."""
    if M < 0:
        raise DomainError("M must be >= 0")
    if not 0 < b < 1:
        raise HypothesisViolation("b ∈ (0,1)")
    if not 0 <= p < -math.log(b):
        raise HypothesisViolation("0 <= p < −ln b")
    return 1.0 + M * b ** (n0 - 1) / (1.0 - math.exp(p) * b)


def asymptotic_exp_moment(L_inv: Callable[[float], float], delta: float, r: float, N: int) -> float:
    """``(δ/(δ−1)) exp(r(L^{-1}(e^{-r}/δ) − (N+1)))`` bounding ``E[e^{r O_N} − 1]``.

    ``O_N`` counts independent events with index ``> N`` and ``L`` is a
    continuous decreasing interpolation of the tail sums ``Σ_{n>=m} P(E_n)``.
    """
    if delta <= 1:
        raise HypothesisViolation("δ > 1")
    if r <= 0:
        raise HypothesisViolation("r > 0")
    x = L_inv(math.exp(-r) / delta)
    if not np.isfinite(x):
        raise DomainError("L_inv returned a non-finite value")
    return delta / (delta - 1.0) * math.exp(r * (x - (N + 1)))


def threshold_exp_moment(L_inv: Callable[[float], float], delta: float, r: float, N: int) -> float:
    """Integer-threshold form ``(δ/(δ−1)) exp(r(ℓ − (N+1)))``, ``ℓ = max(⌊L^{-1}(e^{-r}/δ)⌋ + 1, N+1)``.

    ``ℓ`` is the first index with tail sum below ``e^{-r}/δ``, clipped to
    ``N+1``; unlike :func:`asymptotic_exp_moment` this bounds
    ``E[e^{r O_N} − 1]`` for every admissible interpolation ``L``.
    """
    if delta <= 1:
        raise HypothesisViolation("δ > 1")
    if r <= 0:
        raise HypothesisViolation("r > 0")
    x = L_inv(math.exp(-r) / delta)
    if not np.isfinite(x):
        raise DomainError("L_inv returned a non-finite value")
    ell = max(math.floor(x) + 1, N + 1)
    return delta / (delta - 1.0) * math.exp(r * (ell - (N + 1)))


def _inf_over_r(fun: Callable[[float], float], r_lo: float = 1e-4, r_hi: float = 60.0) -> tuple:
    raw = fun

    def fun(r):
        try:
            return raw(r)
        except (OverflowError, ValueError, ZeroDivisionError):
            return math.inf

    grid = np.geomspace(r_lo, r_hi, 400)
    vals = np.array([fun(r) for r in grid])
    i = int(np.nanargmin(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    res = optimize.minimize_scalar(fun, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
    if res.success and res.fun < vals[i]:
        return float(res.fun), float(res.x)
    return float(vals[i]), float(grid[i])


def asymptotic_tail(L_inv: Callable[[float], float], delta: float, N: int, k: int,
                    variant: str = "minus-one") -> float:
    """Markov tails of ``O_N`` optimized over ``r > 0``.

    Args:
        variant: ``"minus-one"`` for ``inf_r m(r) / (e^{rk} − 1)`` or
            ``"plus-one"`` for ``inf_r (m(r) + 1) / e^{rk}``, where ``m(r)`` is
            :func:`asymptotic_exp_moment`.
    """
    if k < 1:
        raise DomainError("k must be >= 1")

    def safe_log_moment(r):
        x = L_inv(math.exp(-r) / delta)
        return math.log(delta / (delta - 1.0)) + r * (x - (N + 1))

    if variant == "minus-one":
        fun = lambda r: math.exp(safe_log_moment(r) - r * k) / -math.expm1(-r * k)
    elif variant == "plus-one":
        fun = lambda r: math.exp(safe_log_moment(r) - r * k) + math.exp(-r * k)
    else:
        raise DomainError(f"unknown variant {variant!r}")
    return min(_inf_over_r(fun)[0], 1.0)


def fenchel_legendre(L_inv: Callable[[float], float], delta: float, r_star: float) -> tuple:
    """``sup_{r>0} (r r* − r L^{-1}(e^{-r}/δ))`` and its maximizer, by grid plus golden section."""
    val, arg = _inf_over_r(lambda r: -(r * r_star - r * L_inv(math.exp(-r) / delta)))
    return -val, arg


def exponential_decay_moment(c: float, b: float, r: float, N: int) -> float:
    """``2 e^{-r(N+1)} exp((r² + r ln(2c)) / |ln b|)`` for ``P(E_n) <= c b^n``."""
    return 2.0 * math.exp(-r * (N + 1)) * math.exp((r * r + r * math.log(2 * c)) / abs(math.log(b)))


def exponential_decay_L_inv(c: float, b: float) -> Callable[[float], float]:
    """Inverse of ``L(m) = c b^m``."""
    return lambda s: math.log(s / c) / math.log(b)


def gaussian_decay_L_inv(b: float) -> Callable[[float], float]:
    """Inverse of ``L(m) = b^{m²}`` (zero where the logarithm turns negative)."""
    return lambda s: math.sqrt(max(math.log(s) / math.log(b), 0.0))


def gaussian_decay_moment(b: float, r: float, N: int) -> float:
    """``2 exp(−r(N+1)) exp(√(r³ + r² ln 2)/√|ln b|)`` for ``P(E_n) <= b^{n²}``."""
    return 2.0 * math.exp(-r * (N + 1)) * math.exp(math.sqrt(r ** 3 + r * r * math.log(2)) / math.sqrt(abs(math.log(b))))


def gaussian_decay_tail(b: float, N: int, k: int, exponent: float = 1.0 / 9.0) -> float:
    """Cubic-exponent tail ``(e/(e−1)) 2^{1+(1/3)√(ln2/|ln b|)} b^{c (N+k+1)³}``.

    Args:
        b: Decay base in ``(0, 0.99]``.
        N: Offset ``>= 1``.
        k: Count level ``>= 1``.
        exponent: ``c = 1/9`` (default, the stated claim) or ``1/3`` (the
            coefficient reached at the end of the derivation).
    """
    if not 0 < b <= 0.99:
        raise DomainError("b must lie in (0, 0.99]; the prefactor diverges as b -> 1")
    if N < 1 or k < 1:
        raise DomainError("N and k must be >= 1")
    if exponent not in (1.0 / 9.0, 1.0 / 3.0):
        raise DomainError("exponent must be 1/9 or 1/3")
    pref = math.e / (math.e - 1.0) * 2.0 ** (1.0 + math.sqrt(math.log(2) / abs(math.log(b))) / 3.0)
    return pref * b ** (exponent * (N + k + 1) ** 3)


def gaussian_decay_infimum(b: float, N: int, k: int) -> float:
    """``2 inf_r exp(−r(N+1)) exp(√(r³+r² ln2)/√|ln b|) / (e^{rk} − 1)`` evaluated numerically."""
    lb = math.sqrt(abs(math.log(b)))

    def fun(r):
        return 2.0 * math.exp(-r * (N + 1) + math.sqrt(r ** 3 + r * r * math.log(2)) / lb - r * k) / -math.expm1(-r * k)

    return _inf_over_r(fun, 1e-4, 400.0)[0]


def count_overlaps(indicators) -> np.ndarray:
    """Number of fired events; sums along the last axis."""
    arr = np.asarray(indicators)
    out = arr.astype(np.int64).sum(axis=-1)
    return int(out) if out.ndim == 0 else out


def overlap_distribution(probs: Sequence[float]) -> np.ndarray:
    """Exact law of the count of independent events (Poisson-binomial pmf)."""
    pmf = np.zeros(len(probs) + 1)
    pmf[0] = 1.0
    for i, p in enumerate(probs):
        pmf[1 : i + 2] = pmf[1 : i + 2] * (1 - p) + pmf[: i + 1] * p
        pmf[0] *= 1 - p
    return pmf


def last_entry_distribution(event_probs: Sequence[float], k: int, tail_sum: float = 0.0) -> tuple:
    """Bracket for ``P(J = k)`` where ``J`` is the last index of an occurring event.

    Independent events with probabilities ``p_1, p_2, ...``; entry ``i`` of
    ``event_probs`` is ``p_{i+1}``.  With ``tail_sum`` bounding ``Σ p_ℓ`` over
    indices beyond the supplied list, the product over the unlisted factors
    lies in ``[1 − tail_sum, 1]``.

    Returns:
        ``(lower, upper)``; equal when ``tail_sum == 0``.
    """
    p = np.asarray(event_probs, dtype=float)
    if np.any((p < 0) | (p > 1)):
        raise DomainError("probabilities must lie in [0, 1]")
    if not 1 <= k <= len(p):
        return (0.0, float(tail_sum)) if k > len(p) else (0.0, 0.0)
    head = p[k - 1] * float(np.prod(1.0 - p[k:]))
    return float(head * max(0.0, 1.0 - tail_sum)), float(head)


@dataclass
class OverlapTail:
    """The map ``k -> P(O >= k)`` for ``k = 0..k_max``, empirical or analytic.

    Attributes:
        name: Experiment or bound identifier.
        source: ``"empirical"`` or ``"analytic"``.
        k_max: Largest tabulated ``k``.
        exceed: For empirical tails, the number of samples with ``O >= k``.
        samples: Number of Monte Carlo samples (empirical only).
        bound: Bound backing an analytic tail.
        notes: Free-form remarks (truncation, grid bias).
    """

    name: str
    source: str
    k_max: int
    exceed: Optional[np.ndarray] = None
    samples: int = 0
    bound: Optional[BoundSpec] = None
    notes: tuple = ()

    @classmethod
    def from_counts(cls, name: str, counts, k_max: int, notes: Sequence[str] = ()) -> "OverlapTail":
        """Tabulate ``#{O >= k}`` from per-sample overlap counts."""
        counts = np.asarray(counts, dtype=np.int64)
        if counts.ndim != 1 or counts.size == 0:
            raise DomainError("counts must be a non-empty 1-d array")
        hist = np.bincount(np.minimum(counts, k_max), minlength=k_max + 1)
        exceed = np.cumsum(hist[::-1])[::-1].astype(np.int64)
        return cls(name, "empirical", int(k_max), exceed, int(counts.size), None, tuple(notes))

    @classmethod
    def analytic(cls, bound: BoundSpec, k_max: int) -> "OverlapTail":
        return cls(bound.name, "analytic", int(k_max), None, 0, bound)

    def probability(self, k: int) -> float:
        if not 0 <= k <= self.k_max:
            raise DomainError(f"k={k} outside 0..{self.k_max}")
        if self.source == "empirical":
            return float(self.exceed[k]) / self.samples
        if k == 0:
            return 1.0
        return float(self.bound(k)) if self.bound.valid(k) else math.nan

    def frequencies(self) -> np.ndarray:
        return np.array([self.probability(k) for k in range(self.k_max + 1)])
