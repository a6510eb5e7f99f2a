"""Enumeration of Fix(T^n) through inverse branches.

Every periodic point of an expanding degree-``d`` circle map is labelled by the
itinerary of branches its orbit visits.  For each of the ``d**n`` itineraries
the cyclic composition of inverse branches is a contraction; its fixed point is
located by iteration and polished with one Newton step on ``L^n(x) - x - j``.

Itineraries are indexed lexicographically (first symbol most significant), so
the shift ``sigma`` acts on indices as ``(i * d) % d**n + i // d**(n-1)``.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import ceil, log2

import numpy as np

from .exceptions import ConsistencyError, ConvergenceError
from .map_model import (
    TrigMapFamily,
    circle_distance,
    eval_jet,
    eval_lift,
    eval_lift_extended,
    expansion_bound,
    wrap,
)

DEFAULT_POINT_CAP = 2 ** 22
MERGE_TOL = 1e-9
RESIDUAL_TOL = 1e-12
# Fixed block size: results must not depend on how blocks are spread over workers.
BLOCK_SIZE = 4096


def solve_increasing(func, target, lo, hi, x0=None, tol=1e-15, maxiter=100):
    """Solve ``f(x) = target`` for strictly increasing ``f`` on ``[lo, hi]``.

    Vectorised Newton iteration kept inside a shrinking bracket; steps that
    leave the bracket are replaced by bisection.  ``func`` returns ``(f, f')``.
    """
    target = np.asarray(target, dtype=float)
    lo = np.array(np.broadcast_to(lo, target.shape), dtype=float)
    hi = np.array(np.broadcast_to(hi, target.shape), dtype=float)
    x = 0.5 * (lo + hi) if x0 is None else np.array(np.broadcast_to(x0, target.shape), dtype=float)
    for _ in range(maxiter):
        f, df = func(x)
        f = f - target
        lo = np.where(f < 0, x, lo)
        hi = np.where(f > 0, x, hi)
        xn = x - f / df
        bad = ((xn < lo) | (xn > hi)) & (f != 0)
        xn = np.where(bad, 0.5 * (lo + hi), xn)
        step = np.abs(xn - x)
        x = xn
        if np.all(step <= tol):
            return x
    raise ConvergenceError("monotone root solve did not converge")


def _lift_and_slope(family, tau):
    def f(x):
        t0, t1, _ = eval_jet(family, tau, x)
        return t0, t1
    return f


@dataclass(frozen=True)
class BranchPartition:
    """Monotone branches of ``T_tau`` on the fundamental domain ``[anchor, anchor + 1)``.

    ``anchor`` is a fixed point of ``T_tau`` (0 whenever ``L_tau(0)`` is an
    integer); ``cuts[w]`` starts branch ``w`` and ``L_tau - offsets[w]`` maps
    ``[cuts[w], cuts[w+1])`` onto ``[anchor, anchor + 1)``.
    """

    family: TrigMapFamily
    tau: float
    anchor: float
    cuts: np.ndarray
    offsets: np.ndarray

    @property
    def degree(self) -> int:
        return self.family.degree

    @property
    def edges(self) -> np.ndarray:
        return np.append(self.cuts, self.anchor + 1.0)

    def inverse(self, omega, y):
        """Inverse branch ``omega`` applied to ``y`` in ``[anchor, anchor + 1]`` (lift coordinates)."""
        omega = np.asarray(omega)
        y = np.asarray(y, dtype=float)
        edges = self.edges
        lo = edges[omega]
        hi = edges[omega + 1]
        x0 = lo + (y - self.anchor) * (hi - lo)
        return solve_increasing(
            _lift_and_slope(self.family, self.tau), self.offsets[omega] + y, lo, hi, x0
        )

    def branch_of(self, x):
        """Branch index of circle point(s) ``x``."""
        x = np.asarray(x, dtype=float)
        lifted = self.anchor + np.mod(x - self.anchor, 1.0)
        idx = np.searchsorted(self.cuts, lifted, side="right") - 1
        return np.clip(idx, 0, self.degree - 1)


def branch_partition(family: TrigMapFamily, tau: float) -> BranchPartition:
    family.check_tau(tau)
    d = family.degree
    l0 = eval_lift(family, tau, 0.0)
    j0 = int(np.ceil(l0))
    slope = _lift_and_slope(family, tau)
    if l0 == j0:
        anchor = 0.0
    else:
        # L(x) - x increases by d - 1 over [0, 1], so it meets j0 once.
        def g(x):
            v, s = slope(x)
            return v - x, s - 1.0
        anchor = float(solve_increasing(g, np.float64(j0), 0.0, 1.0))
    offsets = j0 + np.arange(d)
    targets = anchor + offsets[1:].astype(float)
    inner = solve_increasing(slope, targets, anchor, anchor + 1.0)
    cuts = np.concatenate([[anchor], np.atleast_1d(inner)])
    return BranchPartition(family, float(tau), anchor, cuts, offsets)


def itinerary_digits(indices, d: int, n: int) -> np.ndarray:
    """``(len(indices), n)`` array of branch symbols, most significant first."""
    indices = np.asarray(indices, dtype=np.int64)
    powers = d ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return (indices[:, None] // powers[None, :]) % d


def shift_index(indices, d: int, n: int):
    size = d ** n
    return (np.asarray(indices, dtype=np.int64) * d) % size + np.asarray(indices) // (size // d)


def _contraction_cap(family, n):
    lam = expansion_bound(family)
    return ceil(60.0 / log2(lam)) + n


def _solve_block(partition: BranchPartition, digits: np.ndarray, tol: float, cap: int):
    """Periodic points (lift coordinates) for a block of itineraries."""
    n = digits.shape[1]
    y = np.full(digits.shape[0], partition.anchor + 0.5)
    for _ in range(cap):
        x = y
        for k in range(n - 1, -1, -1):
            x = partition.inverse(digits[:, k], x)
        delta = np.max(np.abs(x - y))
        y = x
        if delta < tol:
            break
    else:
        raise ConvergenceError(
            "inverse-branch contraction did not converge; the map may not be expanding"
        )
    return _newton_polish(partition, digits, y)


def _orbit_residual(partition, digits, x):
    """Signed ``L^n(x) - x - j`` along the orbit, in extended precision, plus ``(T^n)'``."""
    fam, tau = partition.family, partition.tau
    y = np.asarray(x, dtype=np.longdouble)
    deriv = np.ones_like(y)
    for k in range(digits.shape[1]):
        val, der = eval_lift_extended(fam, tau, y)
        y = val - partition.offsets[digits[:, k]]
        deriv = deriv * der
    return y - np.asarray(x, dtype=np.longdouble), deriv


def _newton_polish(partition, digits, x):
    x_ext = np.asarray(x, dtype=np.longdouble)
    res, deriv = _orbit_residual(partition, digits, x_ext)
    candidate = x_ext - res / (deriv - 1)
    new_res, _ = _orbit_residual(partition, digits, candidate)
    better = np.abs(new_res) <= np.abs(res)
    return np.where(better, candidate, x_ext)


@dataclass(frozen=True)
class FixedPointSet:
    """Distinct fixed points of ``T_tau^n``, stored in itinerary order.

    ``points`` are kept in extended precision: a double cannot hold a point of
    ``T^14`` to better than ``(T^n)' * ulp / 2``, which is about 1e-12.

    ``shift_map[k, i]`` is the position of the record whose point is
    ``T^k(points[i])``; it gives exact orbits without forward iteration.
    """

    n: int
    tau: float
    degree: int
    points: np.ndarray
    itineraries: np.ndarray
    residuals: np.ndarray
    shift_map: np.ndarray

    def __len__(self):
        return len(self.points)

    def itinerary(self, i: int) -> tuple:
        return tuple(int(v) for v in itinerary_digits([self.itineraries[i]], self.degree, self.n)[0])

    def records(self):
        for i in range(len(self.points)):
            yield self.itinerary(i), float(self.points[i]), float(self.residuals[i])

    def orbits(self) -> np.ndarray:
        """``(n, N)`` array; column ``i`` is the orbit of ``points[i]``."""
        return self.points[self.shift_map]


def inverse_branch_point(partition: BranchPartition, itinerary, tol: float = 1e-14) -> float:
    """The periodic point in [0, 1) whose orbit follows ``itinerary`` (period ``len(itinerary)``)."""
    digits = np.asarray(itinerary, dtype=np.int64)[None, :]
    if digits.shape[1] < 1:
        raise ValueError("itinerary must be non-empty")
    if np.any((digits < 0) | (digits >= partition.degree)):
        raise ValueError("itinerary symbols must lie in 0..degree-1")
    cap = _contraction_cap(partition.family, digits.shape[1])
    return wrap(float(_solve_block(partition, digits, tol, cap)[0]))


def _merge_groups(points: np.ndarray) -> np.ndarray:
    """For each point, the smallest index among points within MERGE_TOL of it (circle metric)."""
    order = np.argsort(points, kind="stable")
    sp = points[order]
    close = np.diff(sp) < MERGE_TOL
    group = np.concatenate([[0], np.cumsum(~close)])
    if len(sp) > 1 and circle_distance(sp[-1], sp[0]) < MERGE_TOL:
        group[group == group[-1]] = 0
    rep = np.full(group.max() + 1, np.iinfo(np.int64).max)
    np.minimum.at(rep, group, order)
    out = np.empty_like(order)
    out[order] = rep[group]
    return out


def enumerate_fixed_points(
    family: TrigMapFamily,
    tau: float,
    n: int,
    *,
    workers: int = 1,
    cap: int = DEFAULT_POINT_CAP,
    tol: float = 1e-14,
) -> FixedPointSet:
    """All ``d**n - 1`` solutions of ``T_tau^n x = x``.

    Raises
    ------
    ConsistencyError
        If merging coincident itineraries leaves a count other than ``d**n - 1``.
    """
    if n < 1:
        raise ValueError("period must be >= 1")
    d = family.degree
    size = d ** n
    if size > cap:
        raise ValueError(f"degree**n = {size} exceeds the enumeration cap {cap}")
    partition = branch_partition(family, tau)
    iter_cap = _contraction_cap(family, n)
    blocks = [np.arange(s, min(s + BLOCK_SIZE, size), dtype=np.int64) for s in range(0, size, BLOCK_SIZE)]

    def work(idx):
        return _solve_block(partition, itinerary_digits(idx, d, n), tol, iter_cap)

    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            solved = list(pool.map(work, blocks))
    else:
        solved = [work(b) for b in blocks]
    lifted = np.concatenate(solved)
    points = wrap(lifted)

    rep = _merge_groups(points)
    keep = np.flatnonzero(rep == np.arange(size))
    if len(keep) != size - 1:
        raise ConsistencyError(
            f"found {len(keep)} distinct fixed points of T^{n}, expected {size - 1}"
        )
    position = np.full(size, -1, dtype=np.int64)
    position[keep] = np.arange(len(keep))
    slot_of = position[rep]

    digits = itinerary_digits(keep, d, n)
    res, _ = _orbit_residual(partition, digits, lifted[keep])
    residuals = np.abs(res).astype(np.float64)

    shift_map = np.empty((n, len(keep)), dtype=np.int64)
    cur = keep.copy()
    for k in range(n):
        shift_map[k] = slot_of[cur]
        cur = shift_index(cur, d, n)
    return FixedPointSet(
        n=n,
        tau=float(tau),
        degree=d,
        points=points[keep],
        itineraries=keep,
        residuals=residuals,
        shift_map=shift_map,
    )
