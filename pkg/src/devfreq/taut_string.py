"""Sup-norm distance from a sampled path to an energy ball.

The minimal energy ``½ Σ (Δv)² / Δt`` over piecewise-linear ``v`` with
``v(0) = 0`` and ``|v − w| <= ε`` at every grid point is attained by the taut
string through the tube: the shortest polyline threading the gates
``[w_i − ε, w_i + ε]`` minimizes every separable convex function of the slopes.
A free right end is handled by reflecting the tube about ``t = 1`` and pinning
both ends of the doubled problem at zero.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError
from .paths import PathOnGrid

ENERGY_SLACK = 1e-9
DEFAULT_TOL = 1e-6


def _slope(a, b) -> float:
    return (b[1] - a[1]) / (b[0] - a[0])


def taut_string(times, lo, hi, start: float, end: float) -> np.ndarray:
    """Shortest polyline from ``(t_0, start)`` to ``(t_m, end)`` through vertical gates.

    Args:
        times: Strictly increasing gate abscissae.
        lo: Lower gate ends.
        hi: Upper gate ends; ``lo <= hi``.
        start: Pinned value at ``times[0]``.
        end: Pinned value at ``times[-1]``.

    Returns:
        The string evaluated at ``times``.
    """
    t = np.asarray(times, dtype=float)
    lo = np.asarray(lo, dtype=float).copy()
    hi = np.asarray(hi, dtype=float).copy()
    m = t.size - 1
    if m < 1:
        return np.array([start], dtype=float)
    lo[0] = hi[0] = start
    lo[m] = hi[m] = end
    apex = (t[0], start)
    knots = [apex]
    upper = deque([apex])  # convex chain along upper gate ends
    lower = deque([apex])  # concave chain along lower gate ends
    for i in range(1, m + 1):
        q = (t[i], hi[i])
        while len(upper) >= 2 and _slope(upper[-2], upper[-1]) >= _slope(upper[-1], q):
            upper.pop()
        if len(upper) == 1:
            while len(lower) >= 2 and _slope(lower[0], lower[1]) > _slope(lower[0], q):
                lower.popleft()
                knots.append(lower[0])
            upper = deque([lower[0]])
        upper.append(q)

        p = (t[i], lo[i])
        while len(lower) >= 2 and _slope(lower[-2], lower[-1]) <= _slope(lower[-1], p):
            lower.pop()
        if len(lower) == 1:
            while len(upper) >= 2 and _slope(upper[0], upper[1]) < _slope(upper[0], p):
                upper.popleft()
                knots.append(upper[0])
            lower = deque([upper[0]])
        lower.append(p)
    tail = lower if len(lower) <= len(upper) else upper
    knots.extend(list(tail)[1:])
    kt = np.array([k[0] for k in knots])
    kv = np.array([k[1] for k in knots])
    return np.interp(t, kt, kv)


def discrete_energy(times, values) -> float:
    """``½ Σ (Δv)² / Δt`` for a piecewise-linear path."""
    dt = np.diff(np.asarray(times, dtype=float))
    dv = np.diff(np.asarray(values, dtype=float))
    return 0.5 * float(np.sum(dv * dv / dt))


def _as_arrays(w):
    if isinstance(w, PathOnGrid):
        return np.asarray(w.times, dtype=float), np.asarray(w.values, dtype=float)
    times, values = w
    return np.asarray(times, dtype=float), np.asarray(values, dtype=float)


def tube_minimizer(w, eps: float) -> np.ndarray:
    """Minimal-energy ``v`` with ``v(0) = 0`` and ``|v − w| <= eps`` on the grid, free right end."""
    times, values = _as_arrays(w)
    if eps < 0:
        raise DomainError("eps must be >= 0")
    if abs(values[0]) > eps:
        raise DomainError(f"infeasible anchor: |w(0)| = {abs(values[0]):.3g} > eps")
    if times.size == 1:
        return np.zeros(1)
    T = times[-1]
    full_t = np.concatenate([times, 2 * T - times[-2::-1]])
    full_w = np.concatenate([values, values[-2::-1]])
    v = taut_string(full_t, full_w - eps, full_w + eps, 0.0, 0.0)
    return v[: times.size]


def min_energy_in_tube(w, eps: float) -> float:
    """Minimal discrete energy over paths through the ``eps``-tube around ``w``.

    Args:
        w: A :class:`PathOnGrid` or a ``(times, values)`` pair starting at ``t = 0``.
        eps: Tube radius, at least ``|w(0)|``.
    """
    times, _ = _as_arrays(w)
    return discrete_energy(times, tube_minimizer(w, eps))


@dataclass(frozen=True)
class EnergyBall:
    """Piecewise-linear paths with ``v(0) = 0`` and ``½ Σ (Δv)²/Δt <= r``."""

    r: float

    def __post_init__(self):
        if not self.r > 0:
            raise DomainError("energy budget must be positive")

    def energy(self, w) -> float:
        return discrete_energy(*_as_arrays(w))

    def contains(self, w, slack: float = ENERGY_SLACK) -> bool:
        times, values = _as_arrays(w)
        return values[0] == 0 and discrete_energy(times, values) <= self.r + slack

    def distance(self, w, tol: float = DEFAULT_TOL) -> float:
        return distance_to_ball(w, self.r, tol)


@dataclass
class DistanceCertificate:
    """Bisection outcome: ``E(eps) <= r`` and, when ``eps > tol``, ``E(eps − tol) > r``."""

    eps: float
    energy_at_eps: float
    energy_below: Optional[float]
    r: float
    tol: float

    @property
    def holds(self) -> bool:
        ok = self.energy_at_eps <= self.r + ENERGY_SLACK
        if self.energy_below is not None:
            ok = ok and self.energy_below > self.r
        return ok


def distance_certificate(w, r: float, tol: float = DEFAULT_TOL) -> DistanceCertificate:
    """Bisection for the smallest tube radius whose minimal energy fits in ``r``."""
    times, values = _as_arrays(w)
    if r <= 0:
        raise DomainError("r must be positive")
    if tol <= 0:
        raise DomainError("tol must be positive")
    if values[0] != 0:
        raise DomainError("path must start at 0")
    e0 = discrete_energy(times, values)
    if e0 <= r + ENERGY_SLACK:
        return DistanceCertificate(0.0, e0, None, r, tol)
    lo, hi = 0.0, float(np.max(np.abs(values)))
    e_hi = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        e = min_energy_in_tube((times, values), mid)
        if e <= r + ENERGY_SLACK:
            hi, e_hi = mid, e
        else:
            lo = mid
    below = min_energy_in_tube((times, values), hi - tol) if hi > tol else None
    return DistanceCertificate(hi, e_hi, below, r, tol)


def distance_to_ball(w, r: float, tol: float = DEFAULT_TOL) -> float:
    """``inf_{v in K(r)} max_i |w_i − v_i|`` to absolute tolerance ``tol``."""
    return distance_certificate(w, r, tol).eps


def rescale_strassen(path: PathOnGrid, s: float) -> PathOnGrid:
    """``Z_s(t) = W_{st} / √(2 s ln ln s)`` on the unit-interval image of ``path``'s grid."""
    if not s > math.e:
        raise DomainError("s must exceed e")
    times = np.asarray(path.times, dtype=float)
    if times[0] != 0 or not math.isclose(times[-1], s, rel_tol=1e-12):
        raise DomainError("path grid must span [0, s]")
    scale = math.sqrt(2.0 * s * math.log(math.log(s)))
    unit = times / s
    unit[-1] = 1.0
    return PathOnGrid(unit, np.asarray(path.values, dtype=float) / scale, "explicit", None,
                      {"strassen_s": s})
