"""Closed-form constants, rate schedules and tail bounds for deviation counts.

Every bound is packaged as a :class:`BoundSpec`: a callable ``k -> value`` with
its parameters and the range of ``k`` on which it is claimed.  Values above 1
are returned as they are (they are formally true but carry no information).

Special functions needed by the bounds (zeta, an incomplete-Gamma majorant,
the Gaussian tail majorant, and the sup-of-|BM| distribution) live here too.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional

import numpy as np
from scipy import integrate
from scipy.special import gamma as gamma_fn
from scipy.special import ndtr

from .errors import DomainError, HypothesisViolation

LN2 = math.log(2.0)
E98 = math.exp(9.0 / 8.0)
EULER_GAMMA = float(np.euler_gamma)

# Sup-norm constant of the random Lévy bound.
C_A = math.sqrt(2.0 / LN2) * (1.0 + 1.0 / (2.0 * LN2))
# Second-moment constants of the Lévy sup error.
C_1 = math.sqrt(1.0 + (1.0 + 3.0 / (2.0 * LN2)) / (math.sqrt(2.0) * LN2 ** 1.5))
C_2 = math.sqrt(1.0 + (1.0 + 3.0 / (2.0 ** 1.5 * LN2)) / (4.0 * math.sqrt(2.0) * LN2 ** 1.5))
# Fixed-tolerance Lévy overlap constant.
C_LEVY_FIXED = ((2.0 - math.sqrt(2.0)) / LN2) * (1.0 + 1.0 / LN2) * (
    1.0 / math.sqrt(2.0) + math.sqrt(math.pi)) * C_A * C_1
# Dyadic-grid continuity constant.
K_DOOB = 16.0 * (1.0 / math.sqrt(2.0) + math.sqrt(math.pi))
# Secant blow-up constant.
C_PI = 2.0 ** 10 / math.pi ** 2
CHUNG_PREFACTOR = 24.0 / (5.0 * math.pi)

CONSTANTS: Dict[str, float] = {
    "C_a": C_A,
    "c_1": C_1,
    "c_2": C_2,
    "C_a*c_1": C_A * C_1,
    "C_a*c_2": C_A * C_2,
    "C (fixed-eps Levy)": C_LEVY_FIXED,
    "K (Doob)": K_DOOB,
    "c_pi": C_PI,
    "24/(5 pi)": CHUNG_PREFACTOR,
    "e^(9/8)": E98,
}


# ---------------------------------------------------------------------------
# Special functions
# ---------------------------------------------------------------------------

# B_{2j} / (2j)! for j = 1..10
_BERNOULLI_OVER_FACT = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
    43867.0 / 5109094217170944000.0,
    -174611.0 / 802857662698291200000.0,
]


def _zeta_scalar(s: float, n_direct: int) -> float:
    if not s > 1.0:
        raise DomainError(f"zeta needs s > 1, got {s}")
    N = float(n_direct)
    n = np.arange(1, n_direct, dtype=float)
    head = math.fsum(n ** (-s))
    total = head + N ** (1.0 - s) / (s - 1.0) + 0.5 * N ** (-s)
    # Euler–Maclaurin corrections with rising factorials s(s+1)...(s+2j-2).
    rising = s
    power = N ** (-s - 1.0)
    for j, coef in enumerate(_BERNOULLI_OVER_FACT, start=1):
        term = coef * rising * power
        total += term
        if abs(term) < 1e-17 * total:
            break
        rising *= (s + 2 * j - 1) * (s + 2 * j)
        power /= N * N
    return total


def zeta(s, n_direct: int = 64):
    """Riemann zeta for real ``s > 1``.

    Direct summation of the first ``n_direct - 1`` terms followed by an
    Euler–Maclaurin tail.  Relative error is below 1e-13 for ``s`` in
    ``(1, 200]``.

    Args:
        s: Scalar or array, all entries ``> 1``.
        n_direct: Split point between direct sum and tail expansion.
    """
    if np.ndim(s) == 0:
        return _zeta_scalar(float(s), n_direct)
    arr = np.asarray(s, dtype=float)
    return np.array([_zeta_scalar(float(v), n_direct) for v in arr.ravel()]).reshape(arr.shape)


def gamma_upper_bound(a: float, z: float) -> float:
    """Majorant ``(1 + |a-1|/z) z^{a-1} e^{-z}`` of the upper incomplete Gamma ``Γ(a, z)``."""
    if a <= 0 or z <= 0:
        raise DomainError("gamma_upper_bound needs a > 0 and z > 0")
    return (1.0 + abs(a - 1.0) / z) * z ** (a - 1.0) * math.exp(-z)


def mills_upper(t):
    """Gaussian tail majorant ``e^{-t²/2} / t`` for ``t > 0``."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise DomainError("mills_upper needs t > 0")
    out = np.exp(-0.5 * t_arr ** 2) / t_arr
    return float(out) if np.ndim(t) == 0 else out


def moment_constant(alpha: float) -> float:
    """Absolute moment ``E|N|^α = 2^{α/2} Γ((α+1)/2) / √π`` of a standard normal."""
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    return 2.0 ** (alpha / 2.0) * gamma_fn((alpha + 1.0) / 2.0) / math.sqrt(math.pi)


def chung_sup_cdf(x, tol: float = 1e-14, max_terms: int = 100000):
    """``P(sup_{s<=1} |B_s| < x)`` for standard Brownian motion.

    Small ``x`` uses the alternating theta series
    ``(4/π) Σ (-1)^k e^{-π²(2k+1)²/(8x²)} / (2k+1)``, truncated at the first term
    below ``tol``.  For ``x > 1.5`` the method-of-images series in ``Φ`` is used
    because the theta series converges slowly there.

    Args:
        x: Scalar or array of positive levels.
        tol: Truncation threshold for omitted terms.
        max_terms: Hard cap on terms.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xs <= 0):
        raise DomainError("chung_sup_cdf needs x > 0")
    out = np.empty_like(xs)
    for i, xv in enumerate(xs):
        out[i] = _chung_images(xv, tol) if xv > 1.5 else _chung_theta(xv, tol, max_terms)
    return float(out[0]) if np.ndim(x) == 0 else out


def _chung_theta(x: float, tol: float, max_terms: int) -> float:
    total = 0.0
    for k in range(max_terms):
        m = 2 * k + 1
        term = math.exp(-(math.pi ** 2) * m * m / (8.0 * x * x)) / m
        if term < tol:
            break
        total += term if k % 2 == 0 else -term
    return 4.0 / math.pi * total


def _chung_images(x: float, tol: float) -> float:
    total = ndtr(x) - ndtr(-x)
    k = 1
    while True:
        # k and -k contribute equal amounts by symmetry.
        term = 2.0 * (ndtr((2 * k + 1) * x) - ndtr((2 * k - 1) * x))
        total += -term if k % 2 else term
        if term < tol:
            break
        k += 1
    return float(total)


def kolmogorov_phi(h: Callable[[float], float], s: float) -> float:
    """``φ(s) = ∫_0^s h(t) t^{-3/2} exp(-h(t)²/(2t)) dt``.

    The substitution ``t = u²`` removes the algebraic singularity at 0:
    ``φ(s) = ∫_0^{√s} 2 h(u²) u^{-2} exp(-h(u²)²/(2u²)) du``.
    """
    if s <= 0:
        raise DomainError("kolmogorov_phi needs s > 0")

    def integrand(u):
        if u <= 0:
            return 0.0
        t = u * u
        hv = h(t)
        expo = hv * hv / (2.0 * t)
        if expo > 700:
            return 0.0
        return 2.0 * hv / t * math.exp(-expo)

    val, _ = integrate.quad(integrand, 0.0, math.sqrt(s), limit=400, epsabs=1e-14, epsrel=1e-10)
    return float(val)


# ---------------------------------------------------------------------------
# Containers
# ---------------------------------------------------------------------------


@dataclass
class BoundSpec:
    """A closed-form tail bound ``k -> value`` with its validity range.

    Attributes:
        name: Identifier, e.g. ``"thm7"``.
        params: Parameters used to build the bound.
        func: Vectorizable evaluator of the bound at integer ``k``.
        k_min: Smallest admissible ``k``.
        k_max: Largest admissible ``k`` or None for unbounded.
        shape_only: True when a constant is user-supplied rather than explicit.
        note: Free-text remark carried into reports.
    """

    name: str
    params: dict
    func: Callable
    k_min: int = 1
    k_max: Optional[int] = None
    shape_only: bool = False
    note: str = ""

    def valid(self, k: int) -> bool:
        return k >= self.k_min and (self.k_max is None or k <= self.k_max)

    def __call__(self, k):
        ks = np.atleast_1d(np.asarray(k))
        if not all(self.valid(int(v)) for v in ks):
            raise DomainError(f"{self.name}: k outside valid range [{self.k_min}, {self.k_max or 'inf'}]")
        vals = np.array([float(self.func(int(v))) for v in ks])
        return float(vals[0]) if np.ndim(k) == 0 else vals

    def table(self, k_lo: int, k_hi: int):
        ks = [k for k in range(k_lo, k_hi + 1) if self.valid(k)]
        return [(k, float(self.func(k))) for k in ks]

    def to_dict(self, k_hi: int = 10) -> dict:
        return {
            "name": self.name,
            "params": {key: _jsonable(v) for key, v in self.params.items()},
            "valid_k": [self.k_min, self.k_max],
            "shape_only": self.shape_only,
            "note": self.note,
            "values": [[k, v] for k, v in self.table(self.k_min, max(self.k_min, k_hi))],
        }


@dataclass
class RateSchedule:
    """An error tolerance schedule ``n -> ε_n``."""

    name: str
    params: dict
    func: Callable
    n_min: int = 1
    tail: Optional[BoundSpec] = None
    note: str = ""

    def __call__(self, n):
        if np.ndim(n) == 0:
            if n < self.n_min:
                raise DomainError(f"{self.name}: n must be >= {self.n_min}")
            return float(self.func(int(n)))
        return np.array([self(int(v)) for v in np.asarray(n)])


@dataclass
class OptimalExponent:
    p_k: float
    value: float
    simplified: float
    params: dict = field(default_factory=dict)


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if callable(v):
        return getattr(v, "__name__", repr(v))
    return v


def _require(cond: bool, condition: str, detail: str = "") -> None:
    if not cond:
        raise HypothesisViolation(condition, detail)


# ---------------------------------------------------------------------------
# Generic Borel–Cantelli rates
# ---------------------------------------------------------------------------


def _g_exponent(p, M, b, k):
    return np.exp(-k * p) * (M / (1.0 - np.exp(p) * b) + 1.0)


def optimal_exponent(M: float, b: float, k: int) -> OptimalExponent:
    """Minimize ``g(p) = e^{-kp}(M/(1 - e^p b) + 1)`` over ``p ∈ [0, -ln b)``.

    Args:
        M: Constant ``>= 1``.
        b: Geometric rate in ``(0, 1)``.
        k: Count level ``>= 1``.

    Returns:
        The minimizer ``p_k`` over the interval (the closed-form stationary
        point, clipped at 0), ``g(p_k)`` and the simplified majorant
        ``2e^{9/8}(k(M+1)+1) b^k``.
    """
    _require(M >= 1, "M >= 1")
    _require(0 < b < 1, "0 < b < 1")
    _require(k >= 1, "k >= 1")
    s = 2.0 * k + M * (k + 1.0)
    disc = s * s - 4.0 * k * k * (M + 1.0)
    p = math.log(2.0 * k * (M + 1.0) / (b * (s + math.sqrt(disc))))
    # The stationary point can fall below 0; g increases on [0, -ln b) then.
    p = max(p, 0.0)
    value = float(_g_exponent(p, M, b, k))
    simplified = 2.0 * E98 * (k * (M + 1.0) + 1.0) * b ** k
    return OptimalExponent(p, value, simplified, {"M": M, "b": b, "k": k})


def exp_tail_bound(M: float, b: float, n0: int, k) -> float:
    """``2e^{9/8}[k(M b^{n0-1} + 1) + 1] b^k`` for geometrically decaying event probabilities."""
    _require(M >= 1, "M >= 1")
    _require(0 < b < 1, "0 < b < 1")
    k = np.asarray(k, dtype=float)
    out = 2.0 * E98 * (k * (M * b ** (n0 - 1) + 1.0) + 1.0) * b ** k
    return float(out) if out.ndim == 0 else out


def geometric_bound(name: str, M: float, b: float, params: dict, n0: int = 1, note: str = "") -> BoundSpec:
    return BoundSpec(name, params, lambda k: exp_tail_bound(M, b, n0, k), 1, None, False, note)


# ---------------------------------------------------------------------------
# Lévy construction
# ---------------------------------------------------------------------------


def levy_step_tolerance(alpha: float) -> RateSchedule:
    """Per-generation tolerance ``√(1+α) √(2 ln 2) √j 2^{-j/2}``."""
    _require(alpha > 0, "α > 0")
    f = lambda j: math.sqrt(1 + alpha) * math.sqrt(2 * LN2) * math.sqrt(j) * 2.0 ** (-j / 2.0)
    return RateSchedule("levy-step", {"alpha": alpha}, f, 1)


def levy_delta_rate(theta: float) -> RateSchedule:
    """Close-to-optimal rate ``2^{-J/2}(J+1)^{3/2} ln(J+1)^{1+θ}``."""
    _require(theta > 0, "θ > 0")
    f = lambda J: 2.0 ** (-J / 2.0) * (J + 1.0) ** 1.5 * math.log(J + 1.0) ** (1 + theta)
    tail_c = C_A * C_1 / LN2 ** theta * (1.0 / (2.0 * LN2) + 1.0 / theta)
    tail = BoundSpec("thm1e", {"theta": theta}, lambda k: tail_c / k, 1)
    return RateSchedule("levy-delta", {"theta": theta}, f, 0, tail)


def levy_bounds(kind: str, **p):
    """Bounds for the Lévy–Schauder construction.

    Kinds:
        ``"a"``: random sup-rate schedule ``√(1+α) max(Λ,1) C_a √(J+1) 2^{-J/2}``
            (params ``alpha``, optional ``lam`` for the random factor).
        ``"a-moment"``: Gaussian-moment bound for the random factor
            (``alpha``, ``J``, ``q``).
        ``"b"``: bracket ``(lower, upper)`` for ``P(last bad level = k)``
            (``alpha``, ``k``).
        ``"c"``: step-count tail ``2·2^{-(α/2)(k+J+1)²}`` (``alpha``, ``J``).
        ``"d"``: fixed-tolerance tail ``e(1 + (C/ε) k^{3/2}) 2^{-k/2}``, ``k >= 3``
            (``eps``).
        ``"d-moment"``: ``1 + (C/ε)(ln2/2 - p)^{-3/2}`` (``eps``, ``p``).
        ``"e"``: rate schedule with linear tail (``theta``).
        ``"L2"``: root-mean-square sup error bound (``J``, optional ``which`` 1|2).
    """
    if kind == "a":
        alpha = p["alpha"]
        _require(alpha > 0, "α > 0")
        lam = max(p.get("lam", 1.0), 1.0)
        f = lambda J: math.sqrt(1 + alpha) * lam * C_A * math.sqrt(J + 1.0) * 2.0 ** (-J / 2.0)
        return RateSchedule("thm1a", {"alpha": alpha, "lam": lam}, f, 1)
    if kind == "a-moment":
        alpha, J, q = p["alpha"], p["J"], p["q"]
        _require(alpha > 0, "α > 0")
        _require(J >= 1, "J >= 1")
        _require(0 < q < (1 + alpha) * J, "0 < q < (1+α)J")
        x = (1 + alpha) * J - q
        return (math.sqrt(2.0) * q / ((1 + alpha) * LN2) ** 1.5
                * (1.0 / x + 3.0 / (2.0 * LN2 * x ** 1.5)) * 2.0 ** (-(1 + alpha) * J))
    if kind == "b":
        alpha, k = p["alpha"], p["k"]
        _require(alpha > 0, "α > 0")
        _require(k >= 1, "k >= 1")
        a1 = 1 + alpha
        denom = 2.0 ** a1 - 1.0
        lower = 2.0 ** (-a1 * (k + 1)) * math.exp(-(2.0 ** (-a1 * (k - 1))) / denom)
        upper = 2.0 ** (-a1 * k) * math.exp(-(2.0 ** (-a1 * k)) / denom)
        return lower, upper
    if kind == "c":
        alpha, J = p["alpha"], p.get("J", 0)
        _require(alpha > 0, "α > 0")
        _require(J >= 0, "J >= 0")
        return BoundSpec("thm1c", {"alpha": alpha, "J": J},
                         lambda k: 2.0 * 2.0 ** (-(alpha / 2.0) * (k + J + 1) ** 2), 1)
    if kind == "d":
        eps = p["eps"]
        _require(eps > 0, "ε > 0")
        c = C_LEVY_FIXED / eps
        return BoundSpec("thm1d", {"eps": eps},
                         lambda k: math.e * (1.0 + c * k ** 1.5) * 2.0 ** (-k / 2.0), 3)
    if kind == "d-moment":
        eps, pp = p["eps"], p["p"]
        _require(eps > 0, "ε > 0")
        _require(0 <= pp < LN2 / 2, "0 <= p < ln(2)/2")
        return 1.0 + C_LEVY_FIXED / eps * (LN2 / 2 - pp) ** -1.5
    if kind == "e":
        return levy_delta_rate(p["theta"])
    if kind == "L2":
        J = p["J"]
        which = p.get("which", 2 if J >= 2 else 1)
        _require(J >= 1, "J >= 1")
        _require(which == 1 or J >= 2, "J >= 2 for the c_2 constant")
        c = C_2 if which == 2 else C_1
        return C_A * c * math.sqrt(J + 1.0) * 2.0 ** (-J / 2.0)
    raise DomainError(f"unknown Lévy bound kind {kind!r}")


# ---------------------------------------------------------------------------
# Continuity
# ---------------------------------------------------------------------------


def doob_schedule(theta: float) -> RateSchedule:
    _require(theta > 2, "θ > 2")
    f = lambda n: 2.0 * math.sqrt(theta * math.log(n + 1.0) / n)
    c = 4.0 * zeta(theta - 1.0) / math.sqrt(theta * LN2)
    tail = BoundSpec("thm2-schedule", {"theta": theta}, lambda k: c / k, 1)
    return RateSchedule("doob-eps", {"theta": theta}, f, 1, tail)


def continuity_bounds(kind: str, **p):
    """Bounds for continuity theorems.

    Kinds:
        ``"doob"``: fixed ``eps``; valid for ``k > 4/ε²``.
        ``"doob-schedule"``: ``theta > 2``; returns a :class:`RateSchedule`
            whose ``tail`` is the linear bound.
        ``"chentsov"``: ``alpha, beta, gamma, C`` with ``β − αγ > 0``.
        ``"totoki"``: ``alpha, beta, gamma, delta, d, vol`` with ``β − αγ − δα > 0``.
    """
    if kind == "doob":
        eps = p["eps"]
        _require(eps > 0, "ε > 0")
        e4 = math.exp(eps * eps / 4.0)
        c = K_DOOB * (eps * eps + math.sqrt(math.pi)) * e4 * (e4 - 1.0) / eps ** 5
        k_min = int(math.floor(4.0 / eps ** 2)) + 1
        return BoundSpec("thm2", {"eps": eps},
                         lambda k: math.e * (1.0 + c * k ** 1.5) * math.exp(-eps * eps * k / 4.0), k_min)
    if kind == "doob-schedule":
        return doob_schedule(p["theta"])
    if kind == "chentsov":
        alpha, beta, gam, C = p["alpha"], p["beta"], p["gamma"], p["C"]
        _require(alpha > 0 and beta > 0 and C > 0, "α, β, C > 0")
        r = beta - alpha * gam
        _require(r > 0, "β − αγ > 0", f"β − αγ = {r:g}")
        M = C * (2.0 ** r - 1.0) / (1.0 - 2.0 ** (-r))
        return BoundSpec("thm3", dict(p),
                         lambda k: 2.0 * E98 * (k * (M + 1.0) + 1.0) * 2.0 ** (-k * r), 1)
    if kind == "totoki":
        alpha, beta, gam, delta = p["alpha"], p["beta"], p["gamma"], p["delta"]
        d, vol = p.get("d", 2), p.get("vol", 1.0)
        r = beta - alpha * gam - delta * alpha
        _require(r > 0, "β − αγ − δα > 0", f"β − αγ − δα = {r:g}")
        M = 2.0 ** (d + r) * vol
        return BoundSpec("thm4", dict(p, d=d, vol=vol),
                         lambda k: 2.0 * E98 * (k * (M + 1.0) + 1.0) * 2.0 ** (-k * r), 1)
    raise DomainError(f"unknown continuity bound kind {kind!r}")


def holder_example(process: str, alpha: float, hurst: float = 0.5) -> dict:
    """Moment-condition parameters ``(alpha, beta, C)`` for the worked examples.

    Args:
        process: ``"bm"``, ``"fbm"`` or ``"sheet"``.
        alpha: Moment order (``> 2`` for BM, ``> 1/H`` for fBM, ``> 4`` for the sheet).
        hurst: Hurst index for ``"fbm"``.
    """
    if process == "bm":
        _require(alpha > 2, "α > 2")
        return {"alpha": alpha, "beta": (alpha - 2.0) / 2.0, "C": moment_constant(alpha)}
    if process == "fbm":
        _require(alpha * hurst > 1, "α > 1/H")
        return {"alpha": alpha, "beta": hurst * alpha - 1.0, "C": moment_constant(alpha)}
    if process == "sheet":
        _require(alpha > 4, "α > 4")
        return {"alpha": alpha, "beta": (alpha - 4.0) / 2.0, "d": 2, "vol": 1.0}
    raise DomainError(f"unknown process {process!r}")


# ---------------------------------------------------------------------------
# Fine path properties
# ---------------------------------------------------------------------------


def modulus(delta):
    """``μ(δ) = √(2δ ln(1/δ))``."""
    d = np.asarray(delta, dtype=float)
    out = np.sqrt(2.0 * d * np.log(1.0 / d))
    return float(out) if out.ndim == 0 else out


def fine_property_bounds(kind: str, **p) -> BoundSpec:
    """Bounds for modulus of continuity, secant blow-up and monotonicity.

    Kinds:
        ``"modulus-upper"``: ``theta ∈ (0,1)``, ``eps > (1+θ)/(1−θ) − 1``.
        ``"modulus-lower"``: ``theta, eta, p, K1``; shape-only Gumbel decay.
        ``"pwz"``: ``b ∈ (1, 2^{1/4})``.
        ``"monotone"``: no parameters.
    """
    if kind == "modulus-upper":
        theta, eps = p["theta"], p["eps"]
        _require(0 < theta < 1, "θ ∈ (0,1)")
        _require(eps > (1 + theta) / (1 - theta) - 1, "ε > (1+θ)/(1−θ) − 1")
        rho = modulus_rate(theta, eps)
        a = (1 + eps) ** 2
        K_eps = 8.0 ** (1 + a) / (math.sqrt(math.pi) * (1 + eps) * (1 + a))
        n0 = math.ceil(1.0 / (1.0 - theta))
        M = K_eps / (1.0 - math.exp(-rho)) * math.exp(-rho * (n0 - 1))
        return BoundSpec("thm5-upper", {"theta": theta, "eps": eps, "rho": rho, "K_eps": K_eps},
                         lambda k: 2.0 * E98 * (k * (M + 1.0) + 1.0) * math.exp(-rho * k), 1)
    if kind == "modulus-lower":
        theta, eta, pp, K1 = p["theta"], p["eta"], p["p"], p["K1"]
        _require(0 < theta < 1, "θ ∈ (0,1)")
        _require(0 < eta < theta, "0 < η < θ")
        _require(0 <= pp < 1.0 / (math.exp(eta) * math.sqrt(4 * math.pi * (1 - theta))),
                 "0 <= p < 1/(e^η √(4π(1−θ)))")
        _require(K1 > 0, "K1 > 0")
        return BoundSpec("thm5-lower", dict(p), lambda k: K1 * math.exp(-pp * math.exp(eta * k)), 1,
                         shape_only=True, note="K1 is not explicit; only the Gumbel shape is checked")
    if kind == "pwz":
        b = p["b"]
        _require(1 < b < 2 ** 0.25, "b ∈ (1, 2^{1/4})")
        M = 2.0 * C_PI / b ** 4
        return BoundSpec("thm6", {"b": b},
                         lambda k: 2.0 * E98 * (k * (M + 1.0) + 1.0) * (b ** 4 / 2.0) ** k, 1)
    if kind == "monotone":
        return BoundSpec("thm7", {}, lambda k: 2.0 * E98 * (3.0 * k + 1.0) * 2.0 ** (-k), 1)
    raise DomainError(f"unknown fine-property bound kind {kind!r}")


def modulus_rate(theta: float, eps: float) -> float:
    """``ρ = (1−θ)(1+ε)² − (1+θ)``."""
    return (1 - theta) * (1 + eps) ** 2 - (1 + theta)


# ---------------------------------------------------------------------------
# Quadratic variation
# ---------------------------------------------------------------------------


def qv_event_variance(dt) -> np.ndarray:
    """``Var((ΔW)² − Δt) = 2Δt²`` per increment."""
    return 2.0 * np.asarray(dt, dtype=float) ** 2


def gumbel_qv_constant(t: float, eps: float, lam: float, lam_tilde: float,
                       tol: float = 1e-18, n_cap: int = 200) -> float:
    """Double series ``K₃`` of the exponential-moment quadratic-variation bound.

    Summation stops once an outer term (which dominates its own tail because
    terms decay doubly exponentially) drops below ``tol`` relative to the sum.
    """
    c = eps / (2.0 * t)
    total = 0.0
    for n in range(1, n_cap):
        outer = math.exp(-c * (lam - lam_tilde) * 2.0 ** n)
        inner = 0.0
        for m in range(n, n_cap):
            term = 2.0 * math.exp(-(c * lam * 2.0 ** m - c * lam * 2.0 ** n))
            inner += term
            if term < 1e-300 or term < tol * inner:
                break
        contrib = 2.0 * outer * inner
        total += contrib
        if contrib < tol * total:
            break
    return total


def qv_bounds(kind: str, **p):
    """Quadratic-variation bounds.

    Kinds:
        ``"chebyshev"``: per-partition probability bound ``2t|Π|/ε²``
            (``t, eps, mesh``) -> float.
        ``"schedule"``: ``ε_n = √(2 t n^θ |Π_n|)`` with tail ``ζ(θ)/k``
            (``t, theta, mesh`` callable ``n -> |Π_n|``).
        ``"dyadic"``: ``2e^{9/8}[k(max{2t²/ε²,1}+1)+1] 2^{-k}`` (``t, eps``).
        ``"dyadic-sharp"``: ``... max{6t²/ε²,1} ... 4^{-k}`` (``t, eps``).
        ``"exponential-event"``: ``2 exp(-ελ/(2|Π|))`` (``eps, lam, mesh``) -> float.
        ``"gumbel"``: ``K₃ exp(-(ελ̃/2t) 2^k)`` (``t, eps, lam, lam_tilde``).
        ``"delta-schedule"``: ``δ_n = (2tθ/λ) ln(2^{1/θ} n) 2^{-n}`` with tail
            ``ζ(θ)/k`` (``t, theta, lam``).
    """
    if kind == "chebyshev":
        return 2.0 * p["t"] * p["mesh"] / p["eps"] ** 2
    if kind == "schedule":
        t, theta, mesh = p["t"], p["theta"], p["mesh"]
        _require(theta > 1, "θ > 1")
        f = lambda n: math.sqrt(2.0 * t * n ** theta * mesh(n))
        z = zeta(theta)
        return RateSchedule("thm8-schedule", {"t": t, "theta": theta}, f, 1,
                            BoundSpec("thm8-schedule", {"theta": theta}, lambda k: z / k, 1))
    if kind in ("dyadic", "dyadic-sharp"):
        t, eps = p["t"], p["eps"]
        _require(t > 0 and eps > 0, "t > 0 and ε > 0")
        sharp = kind == "dyadic-sharp"
        M = max((6.0 if sharp else 2.0) * t * t / (eps * eps), 1.0)
        b = 0.25 if sharp else 0.5
        name = "ex4-sharp" if sharp else "ex4"
        return BoundSpec(name, {"t": t, "eps": eps, "M": M},
                         lambda k: 2.0 * E98 * (k * (M + 1.0) + 1.0) * b ** k, 1)
    if kind == "exponential-event":
        lam = p["lam"]
        _require(0 < lam < 0.5, "λ ∈ (0, 1/2)")
        return 2.0 * math.exp(-p["eps"] * lam / (2.0 * p["mesh"]))
    if kind == "gumbel":
        t, eps, lam, lt = p["t"], p["eps"], p["lam"], p["lam_tilde"]
        _require(0 < lam < 0.5, "λ ∈ (0, 1/2)")
        _require(0 < lt < lam, "0 < λ̃ < λ")
        K3 = gumbel_qv_constant(t, eps, lam, lt)
        c = eps * lt / (2.0 * t)
        return BoundSpec("ex5", {"t": t, "eps": eps, "lam": lam, "lam_tilde": lt, "K3": K3},
                         lambda k: K3 * math.exp(-c * 2.0 ** k), 1)
    if kind == "delta-schedule":
        t, theta, lam = p["t"], p["theta"], p["lam"]
        _require(theta > 1, "θ > 1")
        _require(0 < lam < 0.5, "λ ∈ (0, 1/2)")
        f = lambda n: (2 * t * theta / lam) * math.log(2.0 ** (1.0 / theta) * n) * 2.0 ** (-n)
        z = zeta(theta)
        return RateSchedule("ex5-delta", {"t": t, "theta": theta, "lam": lam}, f, 1,
                            BoundSpec("ex5-delta", {"theta": theta}, lambda k: z / k, 1))
    raise DomainError(f"unknown quadratic-variation bound kind {kind!r}")


# ---------------------------------------------------------------------------
# Iterated-logarithm laws
# ---------------------------------------------------------------------------


def lil_envelope(s):
    """``√(2 s ln ln(1/s))`` for ``0 < s < 1/e``."""
    s_arr = np.asarray(s, dtype=float)
    out = np.sqrt(2.0 * s_arr * np.log(np.log(1.0 / s_arr)))
    return float(out) if out.ndim == 0 else out


def chung_scale(t):
    """``√(t / ln ln t)`` for ``t > e``."""
    t_arr = np.asarray(t, dtype=float)
    out = np.sqrt(t_arr / np.log(np.log(t_arr)))
    return float(out) if out.ndim == 0 else out


def lil_bounds(kind: str, **p):
    """Iterated-logarithm bounds.

    Kinds:
        ``"khinchin"``: ``delta > 0, theta ∈ (0,1)``, optional ``p`` with
            ``0 < p < δ − 1`` enabling the second branch of the minimum.
        ``"chung"``: ``q > 1, eps ∈ (0,1), p``; ``combine`` is ``"max"`` (as
            stated in the theorem) or ``"min"``.
        ``"kolmogorov"``: ``h``, ``b`` (callable ``n -> b_n``), optional
            ``weights`` (callable ``n -> a_n``, default 1), ``n_terms``.
        ``"kolmogorov-example"``: ``eps > 0``.
    """
    if kind == "khinchin":
        delta, theta = p["delta"], p["theta"]
        _require(delta > 0, "δ > 0")
        _require(0 < theta < 1, "θ ∈ (0,1)")
        pre = 1.0 / math.log(1.0 / theta) ** (1.0 / delta)
        z1 = zeta(1 + delta)
        pp = p.get("p")
        if pp is not None:
            _require(0 < pp < delta - 1, "0 < p < δ − 1")
            z2 = zeta(delta - pp)
            f = lambda k: pre * min(z1 / k, (1 + delta) * z2 / k ** (pp + 1))
        else:
            f = lambda k: pre * z1 / k
        return BoundSpec("thm10", {"delta": delta, "theta": theta, "p": pp}, f, 1)
    if kind == "chung":
        q, eps, pp = p["q"], p["eps"], p.get("p", 0.0)
        combine = p.get("combine", "max")
        _require(q > 1, "q > 1")
        _require(0 < eps < 1, "ε ∈ (0,1)")
        a = 1.0 / (1.0 - eps) ** 2
        _require(pp < a - 1, "p < 1/(1−ε)² − 1")
        _require(combine in ("max", "min"), "combine ∈ {max, min}")
        pre = CHUNG_PREFACTOR / math.log(q) ** a
        z1 = zeta(a - pp - 1) if a - pp - 1 > 1 else math.inf
        z2 = zeta(a)
        pick = max if combine == "max" else min
        f = lambda k: pre * pick(z1 / ((1 - eps) ** 2 * k ** (pp + 1)), z2 / k)
        return BoundSpec("thm11", {"q": q, "eps": eps, "p": pp, "combine": combine}, f, 1)
    if kind == "kolmogorov":
        h, b = p["h"], p["b"]
        weights = p.get("weights", lambda n: 1.0)
        n_terms = p.get("n_terms", 200)
        total = 0.0
        for n in range(1, n_terms + 1):
            total += weights(n) * kolmogorov_phi(h, b(n))
        S = lambda k: sum(weights(n) for n in range(1, k + 1))
        return BoundSpec("thm12", {"h": h, "n_terms": n_terms, "weighted_sum": total},
                         lambda k: total / S(k), 1,
                         note=f"series truncated after {n_terms} terms")
    if kind == "kolmogorov-example":
        eps = p["eps"]
        _require(eps > 0, "ε > 0")
        return BoundSpec("ex8", {"eps": eps},
                         lambda k: 2.0 * E98 * (k * (1 + eps) / eps + 1.0) * 4.0 ** (-eps * k), 1)
    raise DomainError(f"unknown iterated-logarithm bound kind {kind!r}")


# ---------------------------------------------------------------------------
# Functional law of the iterated logarithm
# ---------------------------------------------------------------------------


def strassen_b(eta: float, eps: float) -> float:
    """``b = 2e² exp((4+8η)/ε²)``."""
    return 2.0 * math.e ** 2 * math.exp((4.0 + 8.0 * eta) / eps ** 2)


def log_sum_tail_constant(theta: float, n_direct: int = 100000) -> float:
    """Certified upper value of ``Σ_{n>=1} 1/(n ln(n+1)^{1+θ})``.

    Direct sum up to ``n_direct`` plus the integral of the decreasing summand
    from ``n_direct`` to infinity, which majorizes the remaining terms.
    """
    _require(theta > 0, "θ > 0")
    n = np.arange(1, n_direct + 1, dtype=float)
    head = math.fsum(1.0 / (n * np.log(n + 1.0) ** (1 + theta)))
    # ∫_N^∞ dx / (x ln(x+1)^{1+θ}) with x = e^u.
    g = lambda u: 1.0 / math.log1p(math.exp(u)) ** (1 + theta) if u < 700 else u ** -(1 + theta)
    tail, _ = integrate.quad(g, math.log(n_direct), math.inf, limit=400)
    return head + tail


def strassen_bounds(kind: str, **p):
    """Bounds for the distance of rescaled paths to the energy ball.

    Kinds:
        ``"energy"``: ``a, theta_ (ϑ), eta, q``; shape-only since ``a`` is not explicit.
        ``"large"``: ``eta, vartheta, p, q, eps``.
        ``"optimized"``: ``eta, q, eps``.
        ``"schedule"``: ``eta, vartheta, theta, q``; returns a :class:`RateSchedule`.
    """
    if kind == "energy":
        a, vt, eta, q = p["a"], p["vartheta"], p["eta"], p["q"]
        _require(eta > 0, "η > 0")
        _require(0 < vt < eta, "0 < ϑ < η")
        _require(q > 1, "q > 1")
        c = a * zeta(1 + 2 * vt) / math.log(q) ** (1 + 2 * vt)
        return BoundSpec("thm13-2", dict(p), lambda k: c / k, 1, shape_only=True,
                         note="constant a is not explicit")
    if kind == "large":
        eta, vt, pp, q, eps = p["eta"], p["vartheta"], p["p"], p["q"], p["eps"]
        _require(eta > 0.5, "η > 1/2")
        _require(0.5 < vt < eta, "1/2 < ϑ < η")
        _require(0 < pp < 2 * vt - 1, "0 < p < 2ϑ − 1")
        _require(q > 1 and eps > 0, "q > 1 and ε > 0")
        b = strassen_b(eta, eps)
        c = (pp + 1) * (1 + 2 * vt) / (2 * vt) * b * zeta(2 * vt - pp) / math.log(q) ** (1 + 2 * vt)
        return BoundSpec("thm13-3a", dict(p, b=b), lambda k: k ** (-(1 + pp)) * c, 1)
    if kind == "optimized":
        eta, q, eps = p["eta"], p["q"], p["eps"]
        _require(eta > 0.5, "η > 1/2")
        _require(q > 1 and eps > 0, "q > 1 and ε > 0")
        b = strassen_b(eta, eps)
        k_min = math.ceil(max(1.0 / math.log(q), math.exp(1.0 / (2 * eta - 1) - EULER_GAMMA + 1)))
        k_min = max(k_min, 2)

        def f(k):
            u = 1.0 / (math.log(k) + EULER_GAMMA - 1.0)
            return (k ** (-2 * eta) * zeta(1 + u) * k ** u * b / math.log(q) ** (1 + 2 * eta)
                    * (2 * eta - u) * (1 + 1 / (2 * eta)))

        return BoundSpec("thm13-3b", dict(p, b=b), f, k_min)
    if kind == "schedule":
        eta, vt, theta, q = p["eta"], p["vartheta"], p["theta"], p["q"]
        _require(eta > 0.5, "η > 1/2")
        _require(0.5 < vt < eta, "1/2 < ϑ < η")
        _require(theta > 0 and q > 1, "θ > 0 and q > 1")
        base = math.log(math.log(q) ** (1 + 2 * vt) / (2 * math.e ** 2))

        def arg(n):
            return base + math.log(n ** (2 * vt) / math.log(n + 1.0) ** (1 + theta))

        n_min = 1
        while arg(n_min) <= 0:
            n_min += 1
            if n_min > 10 ** 7:
                raise HypothesisViolation("positive schedule argument", "no admissible n below 1e7")
        f = lambda n: math.sqrt((4 + 8 * eta) / arg(n))
        c = log_sum_tail_constant(theta)
        return RateSchedule("thm13-3c", dict(p), f, n_min,
                            BoundSpec("thm13-3c", dict(p), lambda k: c / k, 1))
    raise DomainError(f"unknown functional-LIL bound kind {kind!r}")


# ---------------------------------------------------------------------------
# Registry used by the command line
# ---------------------------------------------------------------------------


def _tail(obj):
    return obj.tail if isinstance(obj, RateSchedule) else obj


BOUND_REGISTRY: Dict[str, tuple] = {
    "thm1c": (lambda **p: levy_bounds("c", **p), {"alpha": 1.0, "J": 0}),
    "thm1d": (lambda **p: levy_bounds("d", **p), {"eps": 0.5}),
    "thm1e": (lambda **p: _tail(levy_bounds("e", **p)), {"theta": 1.0}),
    "thm2": (lambda **p: continuity_bounds("doob", **p), {"eps": 1.0}),
    "thm2-schedule": (lambda **p: _tail(continuity_bounds("doob-schedule", **p)), {"theta": 3.0}),
    "thm3": (lambda **p: continuity_bounds("chentsov", **p),
             {"alpha": 4.0, "beta": 1.0, "gamma": 0.2, "C": 3.0}),
    "thm4": (lambda **p: continuity_bounds("totoki", **p),
             {"alpha": 8.0, "beta": 2.0, "gamma": 0.1, "delta": 0.05, "d": 2, "vol": 1.0}),
    "thm5-upper": (lambda **p: fine_property_bounds("modulus-upper", **p), {"theta": 0.2, "eps": 1.0}),
    "thm5-lower": (lambda **p: fine_property_bounds("modulus-lower", **p),
                   {"theta": 0.5, "eta": 0.25, "p": 0.2, "K1": 1.0}),
    "thm6": (lambda **p: fine_property_bounds("pwz", **p), {"b": 1.1}),
    "thm7": (lambda **p: fine_property_bounds("monotone", **p), {}),
    "thm8-schedule": (lambda **p: _tail(qv_bounds("schedule", mesh=lambda n: p.get("t", 1.0) * 2.0 ** -n, **p)),
                      {"t": 1.0, "theta": 2.0}),
    "ex4": (lambda **p: qv_bounds("dyadic", **p), {"t": 1.0, "eps": 0.5}),
    "ex4-sharp": (lambda **p: qv_bounds("dyadic-sharp", **p), {"t": 1.0, "eps": 0.5}),
    "ex5": (lambda **p: qv_bounds("gumbel", **p), {"t": 1.0, "eps": 1.0, "lam": 0.4, "lam_tilde": 0.2}),
    "thm10": (lambda **p: lil_bounds("khinchin", **p), {"delta": 2.0, "theta": 0.25}),
    "thm11": (lambda **p: lil_bounds("chung", **p), {"q": 4.0, "eps": 0.5, "p": 0.5}),
    "ex8": (lambda **p: lil_bounds("kolmogorov-example", **p), {"eps": 0.25}),
    "thm13-2": (lambda **p: strassen_bounds("energy", **p), {"a": 1.0, "vartheta": 0.5, "eta": 1.0, "q": math.e}),
    "thm13-3a": (lambda **p: strassen_bounds("large", **p),
                 {"eta": 1.0, "vartheta": 0.9, "p": 0.5, "q": math.e, "eps": 2.0}),
    "thm13-3b": (lambda **p: strassen_bounds("optimized", **p), {"eta": 1.0, "q": math.e, "eps": 2.0}),
    "thm13-3c": (lambda **p: _tail(strassen_bounds("schedule", **p)),
                 {"eta": 1.0, "vartheta": 0.9, "theta": 1.0, "q": math.e}),
    "cor2": (lambda **p: BoundSpec("cor2", dict(p), lambda k: exp_tail_bound(p["M"], p["b"], p.get("n0", 1), k), 1),
             {"M": 1.0, "b": 0.5, "n0": 1}),
}


def build_bound(name: str, **params) -> BoundSpec:
    """Build a registered bound, filling unspecified parameters with defaults."""
    if name not in BOUND_REGISTRY:
        raise DomainError(f"unknown bound {name!r}; known: {', '.join(sorted(BOUND_REGISTRY))}")
    builder, defaults = BOUND_REGISTRY[name]
    merged = dict(defaults)
    merged.update(params)
    return builder(**merged)
