"""Weighted traces over Fix(T^n) and their (u, tau) derivatives.

For the weight ``-u g - log T_tau'`` the trace of the n-th power is

    b_n(u, tau) = sum_{T^n x = x} exp(-u S_n g(x)) / ((T^n)'(x) - 1)

(orientation-preserving maps, so ``(T^n)' > 1``).  Derivatives at
``(u, tau) = (0, 0)`` only need per-orbit data: ``(T^n)'``, ``(T^n)''``,
``X_n = d/dtau T^n`` and ``X_n'``.

All sums over fixed points run in itinerary order through ``math.fsum``, which
is exactly rounded and therefore independent of evaluation order.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import fsum
from typing import NamedTuple

import numpy as np

from .exceptions import ConsistencyError, InputError
from .map_model import Observable, TrigMapFamily, eval_jet, eval_lift_extended, eval_tau_jet, wrap
from .periodic_points import FixedPointSet, enumerate_fixed_points

CYCLIC_RTOL = 1e-10
PRECONDITION_TOL = 1e-12


@dataclass(frozen=True)
class OrbitJet:
    """Per-orbit quantities for one fixed point ``x`` of ``T^n`` (family at its tau = 0)."""

    orbit: np.ndarray
    Dn: float
    Dn2: float
    Sg: float
    Xn: float
    Xn1: float
    shift_Xn: np.ndarray  # X_n(x_k)
    shift_g1: np.ndarray  # g'(x_k)
    shift_Dn: np.ndarray  # (T^n)'(x_k)


@dataclass(frozen=True)
class OrbitJets:
    """Vectorised :class:`OrbitJet` over a whole :class:`FixedPointSet` (column per point)."""

    points: FixedPointSet
    Dn: np.ndarray
    Dn2: np.ndarray
    Sg: np.ndarray
    Xn: np.ndarray
    Xn1: np.ndarray
    shift_Xn: np.ndarray
    shift_g1: np.ndarray
    shift_Dn: np.ndarray

    def __getitem__(self, i) -> OrbitJet:
        return OrbitJet(
            orbit=np.asarray(self.points.orbits()[:, i], dtype=float),
            Dn=float(self.Dn[i]),
            Dn2=float(self.Dn2[i]),
            Sg=float(self.Sg[i]),
            Xn=float(self.Xn[i]),
            Xn1=float(self.Xn1[i]),
            shift_Xn=self.shift_Xn[:, i].copy(),
            shift_g1=self.shift_g1[:, i].copy(),
            shift_Dn=self.shift_Dn[:, i].copy(),
        )


class TracePartials(NamedTuple):
    n: int
    b: float
    bu: float
    btau: float
    butau: float


def _orbit_recursions(family, observable, orbits):
    """Products and tau-derivatives along orbits of shape ``(n, N)``.

    Forward recursions, with ``P_k = (T^k)'(x)`` and ``Y_k = d/dtau T^k(x)``:
      (T^{k+1})''  = T''(x_k) P_k^2 + T'(x_k) (T^k)''
      Y_{k+1}      = X(x_k) + T'(x_k) Y_k
      Y_{k+1}'     = X'(x_k) P_k + T''(x_k) P_k Y_k + T'(x_k) Y_k'
    """
    _, t1, t2 = eval_jet(family, 0.0, orbits)
    X, X1 = eval_tau_jet(family, orbits)
    t1 = np.atleast_2d(t1)
    t2 = np.atleast_2d(t2)
    X = np.broadcast_to(X, t1.shape)
    X1 = np.broadcast_to(X1, t1.shape)
    P = np.ones(t1.shape[1])
    D2 = np.zeros_like(P)
    Y = np.zeros_like(P)
    Y1 = np.zeros_like(P)
    for k in range(t1.shape[0]):
        Y1 = X1[k] * P + t2[k] * P * Y + t1[k] * Y1
        Y = X[k] + t1[k] * Y
        D2 = t2[k] * P * P + t1[k] * D2
        P = P * t1[k]
    Sg = np.sum(observable(orbits), axis=0)
    g1 = observable.derivative(orbits)
    return P, D2, Sg, Y, Y1, np.broadcast_to(g1, t1.shape)


def _check_expanding(Dn):
    if not np.all(Dn > 1.0):
        raise ConsistencyError("(T^n)' <= 1 at a periodic point; map not orientation-preserving expanding")


def orbit_jets(points: FixedPointSet, family: TrigMapFamily, observable: Observable) -> OrbitJets:
    """Jets for every point of ``points``, which must be a fixed-point set of ``family`` at tau = 0."""
    orbits = np.asarray(points.orbits(), dtype=float)
    Dn, Dn2, Sg, Xn, Xn1, g1 = _orbit_recursions(family, observable, orbits)
    _check_expanding(Dn)
    shift_Dn = Dn[points.shift_map]
    if np.max(np.abs(shift_Dn - Dn) / Dn) > CYCLIC_RTOL:
        raise ConsistencyError("cyclic product identity (T^n)'(x_k) = (T^n)'(x) violated")
    return OrbitJets(
        points=points,
        Dn=Dn,
        Dn2=Dn2,
        Sg=Sg,
        Xn=Xn,
        Xn1=Xn1,
        shift_Xn=Xn[points.shift_map],
        shift_g1=np.array(g1),
        shift_Dn=shift_Dn,
    )


def orbit_jet(family: TrigMapFamily, observable: Observable, tau: float, x: float, n: int) -> OrbitJet:
    """Jet of a single fixed point ``x`` of ``T_tau^n``; tau-derivatives are taken at ``tau``.

    Raises
    ------
    InputError
        If ``x`` is not a fixed point of ``T_tau^n`` to within 1e-12.
    """
    fam = family.rebase(tau)
    y = np.longdouble(x)
    for _ in range(n):
        y = eval_lift_extended(fam, 0.0, y)[0]
    gap = float(abs(y - np.longdouble(x) - np.rint(y - np.longdouble(x))))
    if gap > PRECONDITION_TOL:
        raise InputError(f"x={x!r} is not a fixed point of T^{n} (residual {gap:.3g})")

    orbit = np.empty(n)
    orbit[0] = wrap(float(x))
    for k in range(1, n):
        orbit[k] = wrap(eval_jet(fam, 0.0, orbit[k - 1])[0])
    # column j holds the orbit started at x_j
    rolled = np.stack([np.roll(orbit, -j) for j in range(n)], axis=1)
    Dn, Dn2, Sg, Xn, Xn1, g1 = _orbit_recursions(fam, observable, rolled)
    _check_expanding(Dn[:1])
    if np.max(np.abs(Dn - Dn[0]) / Dn[0]) > CYCLIC_RTOL:
        raise ConsistencyError("cyclic product identity violated")
    return OrbitJet(
        orbit=orbit,
        Dn=float(Dn[0]),
        Dn2=float(Dn2[0]),
        Sg=float(Sg[0]),
        Xn=float(Xn[0]),
        Xn1=float(Xn1[0]),
        shift_Xn=Xn.copy(),
        shift_g1=np.array(g1[:, 0]),
        shift_Dn=Dn.copy(),
    )


def _dn_and_birkhoff(points, family, tau, potential):
    orbits = np.asarray(points.orbits(), dtype=float)
    _, t1, _ = eval_jet(family, tau, orbits)
    Dn = np.prod(np.atleast_2d(t1), axis=0)
    _check_expanding(Dn)
    return Dn, np.sum(potential(orbits), axis=0)


def trace_b(family, observable, tau, u, n, *, workers=1) -> float:
    """``b_n(u, tau)`` for the weight ``-u g - log T_tau'``."""
    points = enumerate_fixed_points(family, tau, n, workers=workers)
    Dn, Sg = _dn_and_birkhoff(points, family, tau, observable)
    return fsum(np.exp(-u * Sg) / (Dn - 1.0))


def flat_trace(family, potential: Observable, tau, n, *, workers=1) -> float:
    """Trace for an arbitrary potential ``phi``: ``sum exp(S_n phi) / (1 - 1/(T^n)')``.

    With ``phi = 0`` this counts periodic points with the weight of topological
    entropy (``b_n = d**n`` for the linear map).
    """
    points = enumerate_fixed_points(family, tau, n, workers=workers)
    Dn, S = _dn_and_birkhoff(points, family, tau, potential)
    return fsum(np.exp(S) / (1.0 - 1.0 / Dn))


def partials_from_jets(jets: OrbitJets) -> TracePartials:
    Dn, Dn2, Sg, Xn, Xn1 = jets.Dn, jets.Dn2, jets.Sg, jets.Xn, jets.Xn1
    dm1 = Dn - 1.0
    # d/dtau of (T^n)' along the moving fixed point
    dD = Xn1 + Dn2 * Xn / (1.0 - Dn)
    inner = np.sum(jets.shift_Xn * jets.shift_g1 / (jets.shift_Dn - 1.0), axis=0)
    b = fsum(1.0 / dm1)
    bu = -fsum(Sg / dm1)
    btau = -fsum(dD / dm1 ** 2)
    butau = fsum(Sg / dm1 ** 2 * dD + inner / dm1)
    return TracePartials(jets.points.n, b, bu, btau, butau)


def trace_b_partials(family, observable, n, *, tau=0.0, workers=1) -> TracePartials:
    """``(b, db/du, db/dtau, d2b/du dtau)`` at ``u = 0`` and parameter ``tau``.

    The family is re-based so the derivative formulas are applied at its origin.
    """
    fam = family.rebase(tau)
    points = enumerate_fixed_points(fam, 0.0, n, workers=workers)
    return partials_from_jets(orbit_jets(points, fam, observable))


def trace_table(family, observable, n_max, *, tau=0.0, workers=1) -> list[TracePartials]:
    return [trace_b_partials(family, observable, n, tau=tau, workers=workers) for n in range(1, n_max + 1)]
