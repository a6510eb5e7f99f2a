"""Truncated dynamical determinant ``d(z) = exp(-sum_n b_n z^n / n) = sum_n a_n z^n``.

Coefficients follow Newton's identity ``n a_n = -sum_{k<n} a_k b_{n-k}``; the
(u, tau) partials obey the differentiated recursions.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import fsum, log
from typing import NamedTuple, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .exceptions import ConvergenceError, ZeroNotBracketedError
from .orbit_traces import TracePartials

DEFAULT_N_MAX = 12
TAIL_TOL = 1e-8
ZERO_TOL = 1e-13
# |coefficients| below this (relative to max(1, max|c|)) are rounding noise
NOISE_FLOOR = 1e-14
FIT_WINDOW = 4


def det_coefficients(b: Sequence[float], n_max: int) -> np.ndarray:
    """``a_0 .. a_{n_max}`` from traces ``b[0] = b_1, b[1] = b_2, ...``."""
    if len(b) < n_max:
        raise ValueError(f"need {n_max} traces, got {len(b)}")
    b = [float(v) for v in b]
    a = [1.0]
    for n in range(1, n_max + 1):
        a.append(-fsum(a[k] * b[n - k - 1] for k in range(n)) / n)
    return np.array(a)


@dataclass(frozen=True)
class DetSeries:
    """Coefficients ``a_n`` and their partials at ``(u, tau) = (0, 0)``, ``n = 0..n_max``."""

    n_max: int
    a: np.ndarray
    au: np.ndarray
    atau: np.ndarray
    autau: np.ndarray
    b_table: tuple = ()

    def recursion_residuals(self) -> np.ndarray:
        """``|n a_n + sum_{j<n} a_j b_{n-j}|`` for ``n = 1..n_max``."""
        b = [row.b for row in self.b_table]
        return np.array([
            abs(n * self.a[n] + fsum(self.a[j] * b[n - j - 1] for j in range(n)))
            for n in range(1, self.n_max + 1)
        ])


def det_coefficient_partials(b_table: Sequence[TracePartials], n_max: int) -> DetSeries:
    """Full :class:`DetSeries` from per-n trace partials."""
    if len(b_table) < n_max:
        raise ValueError(f"need {n_max} trace rows, got {len(b_table)}")
    rows = list(b_table)[:n_max]
    b = [r.b for r in rows]
    bu = [r.bu for r in rows]
    bt = [r.btau for r in rows]
    but = [r.butau for r in rows]
    a = det_coefficients(b, n_max)
    au, at, aut = [0.0], [0.0], [0.0]
    for n in range(1, n_max + 1):
        idx = range(n)
        au.append(-fsum(au[j] * b[n - j - 1] + a[j] * bu[n - j - 1] for j in idx) / n)
        at.append(-fsum(at[j] * b[n - j - 1] + a[j] * bt[n - j - 1] for j in idx) / n)
        aut.append(-fsum(
            aut[j] * b[n - j - 1]
            + au[j] * bt[n - j - 1]
            + at[j] * bu[n - j - 1]
            + a[j] * but[n - j - 1]
            for j in idx
        ) / n)
    return DetSeries(n_max, a, np.array(au), np.array(at), np.array(aut), tuple(rows))


def det_series(b: Sequence[float], n_max: int) -> DetSeries:
    """Series without parameter dependence (raw potentials, pressure computations)."""
    rows = tuple(TracePartials(n + 1, float(b[n]), 0.0, 0.0, 0.0) for n in range(n_max))
    return det_coefficient_partials(rows, n_max)


class DetValues(NamedTuple):
    d: float
    dz: float
    du: float
    dtau: float
    dutau: float
    dtauz: float


def eval_det(series: DetSeries, z: float) -> DetValues:
    """Horner evaluation of ``d`` and its partials at ``(z, 0, 0)``."""
    def horner(c):
        return float(P.polyval(z, c))
    return DetValues(
        d=horner(series.a),
        dz=horner(P.polyder(series.a)),
        du=horner(series.au),
        dtau=horner(series.atau),
        dutau=horner(series.autau),
        dtauz=horner(P.polyder(series.atau)),
    )


def _noise_floor(c: np.ndarray) -> float:
    return NOISE_FLOOR * max(1.0, float(np.max(c)) if c.size else 1.0)


def geometric_fit(coeffs: Sequence[float], window: int = FIT_WINDOW):
    """Fit ``|c_n| ~ C r^n`` on the last ``window`` coefficients (n >= 1) above rounding noise.

    Coefficients at noise level carry no decay information, so the window slides
    back past them.  With fewer than three usable values the sequence counts as
    terminated and ``(0.0, 0.0)`` is returned.
    """
    c = np.abs(np.asarray(coeffs, dtype=float))
    idx = (np.flatnonzero(c[1:] > _noise_floor(c)) + 1)[-window:]
    if idx.size < 3:
        return 0.0, 0.0
    slope, intercept = np.polyfit(idx, np.log(c[idx]), 1)
    return float(np.exp(intercept)), float(np.exp(slope))


def tail_estimate(coeffs: Sequence[float], z: float = 1.0, window: int = FIT_WINDOW) -> float:
    """Geometric estimate of ``|sum_{n > n_max} c_n z^n|``.

    Zero when the last ``window`` coefficients are all rounding noise; infinite
    when no decay can be fitted or the fitted ratio reaches ``1 / |z|``.
    """
    c = np.abs(np.asarray(coeffs, dtype=float))
    if np.all(c[-window:] <= _noise_floor(c)):
        return 0.0
    C, r = geometric_fit(c, window)
    rz = r * abs(z)
    if r == 0.0 or rz >= 1.0:
        return float("inf")
    n_max = len(c) - 1
    return C * rz ** (n_max + 1) / (1.0 - rz)


class ZeroResult(NamedTuple):
    z_star: float
    pressure: float


def validated_radius(series: DetSeries, z_cap: float, tol: float = TAIL_TOL) -> float:
    """Largest ``z <= z_cap`` at which the tail estimate of ``d`` stays below ``tol``."""
    if tail_estimate(series.a, z_cap) < tol:
        return z_cap
    lo, hi = 0.0, z_cap
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if tail_estimate(series.a, mid) < tol:
            lo = mid
        else:
            hi = mid
    return lo


def find_smallest_zero(series: DetSeries, *, z_cap: float | None = None, grid: int = 2000) -> ZeroResult:
    """Smallest positive zero ``z*`` of the truncated determinant and ``P = -log z*``.

    Scans a geometric grid up to the validated radius for a sign change, then
    polishes with bracketed Newton (bisection whenever Newton leaves the bracket).
    """
    a = series.a
    if z_cap is None:
        b1 = abs(a[1]) if series.n_max >= 1 else 0.0
        z_cap = 4.0 * (1.0 / b1 + 1.0) if b1 > 0 else 4.0
    z_hi = validated_radius(series, z_cap)
    if z_hi <= 0.0:
        raise ZeroNotBracketedError("no z range passes the tail certificate")
    zs = np.geomspace(z_hi * 1e-6, z_hi, grid)
    ds = P.polyval(zs, a)
    hits = np.flatnonzero(ds <= 0.0)
    if hits.size == 0:
        raise ZeroNotBracketedError(f"d(z) has no sign change on (0, {z_hi:.6g}]")
    i = hits[0]
    if ds[i] == 0.0:
        return ZeroResult(float(zs[i]), 0.0 - log(zs[i]))
    lo = float(zs[i - 1]) if i > 0 else 0.0
    hi = float(zs[i])
    da = P.polyder(a)
    z = 0.5 * (lo + hi)
    for _ in range(200):
        f = float(P.polyval(z, a))
        if abs(f) < ZERO_TOL or hi - lo <= 4 * np.finfo(float).eps * hi:
            return ZeroResult(z, 0.0 - log(z))
        if f > 0:
            lo = z
        else:
            hi = z
        fp = float(P.polyval(z, da))
        zn = z - f / fp if fp != 0 else lo - 1.0
        z = zn if lo < zn < hi else 0.5 * (lo + hi)
    raise ConvergenceError("zero polishing did not converge")
