"""Brute-force validators that share nothing with the determinant pipeline but the map.

* Ulam discretisation of the transfer operator, with exact (branch-inverted)
  matrix entries, and its stationary density by power iteration.
* Finite-difference response from Ulam averages.
* Grid-scan search for fixed points of ``T^n``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .exceptions import ConsistencyError, ConvergenceError
from .map_model import Observable, TrigMapFamily, eval_lift

DEFAULT_BINS = 2 ** 15
DEFAULT_FD_STEP = 0.01


def _bisect(f, target, lo, hi, tol):
    """Plain vectorised bisection for increasing ``f``; returns the bracket midpoint."""
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    while True:
        width = np.max(hi - lo) if lo.size else 0.0
        if width <= tol:
            break
        mid = 0.5 * (lo + hi)
        if np.all((mid == lo) | (mid == hi)):
            break
        below = f(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class UlamModel:
    """Row-stochastic ``m x m`` matrix: ``P[i, j] = |B_i & T^-1 B_j| / |B_i|``."""

    m: int
    tau: float
    P: sp.csr_matrix

    def row_sums(self) -> np.ndarray:
        return np.asarray(self.P.sum(axis=1)).ravel()


def build_ulam(family: TrigMapFamily, tau: float, m: int) -> UlamModel:
    if m < 2:
        raise ValueError("need at least two bins")
    family.check_tau(tau)
    edges = np.arange(m + 1) / m
    L = eval_lift(family, tau, edges)
    if np.any(np.diff(L) <= 0):
        raise ConsistencyError("lift is not increasing on the bin grid")
    # grid values k/m strictly inside each image interval (L[i], L[i+1])
    k_first = np.floor(L[:-1] * m).astype(np.int64) + 1
    k_last = np.ceil(L[1:] * m).astype(np.int64) - 1
    counts = np.maximum(k_last - k_first + 1, 0)
    rows = np.repeat(np.arange(m), counts)
    offsets = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    ks = np.repeat(k_first, counts) + offsets
    cut = _bisect(
        lambda x: eval_lift(family, tau, x), ks / m, edges[rows], edges[rows + 1], 1e-15
    )
    # breakpoints of every bin: left edge, interior preimages, right edge
    n_pieces = counts + 1
    starts = np.cumsum(n_pieces) - n_pieces
    total = int(n_pieces.sum())
    left = np.empty(total)
    right = np.empty(total)
    first = starts
    left[first] = edges[:-1]
    piece_rows = np.repeat(np.arange(m), n_pieces)
    interior = np.ones(total, dtype=bool)
    interior[first] = False
    left[interior] = cut
    last = starts + n_pieces - 1
    right[last] = edges[1:]
    notlast = np.ones(total, dtype=bool)
    notlast[last] = False
    right[notlast] = cut
    target_k = np.repeat(k_first - 1, n_pieces) + (np.arange(total) - np.repeat(starts, n_pieces))
    cols = np.mod(target_k, m)
    vals = (right - left) * m
    P = sp.csr_matrix((vals, (piece_rows, cols)), shape=(m, m))
    P.sum_duplicates()
    return UlamModel(m=m, tau=float(tau), P=P)


def stationary_density(model: UlamModel, tol: float = 1e-13, maxiter: int = 100_000) -> np.ndarray:
    """Left fixed vector of ``P`` normalised to mean 1 (a density on [0, 1))."""
    PT = model.P.T.tocsr()
    rho = np.ones(model.m)
    for _ in range(maxiter):
        new = PT @ rho
        new *= model.m / new.sum()
        if np.max(np.abs(new - rho)) < tol:
            return new
        rho = new
    raise ConvergenceError(f"power iteration did not reach {tol:g} in {maxiter} steps")


def ulam_srb_average(model: UlamModel, observable: Observable, density: np.ndarray | None = None) -> float:
    if density is None:
        density = stationary_density(model)
    mids = (np.arange(model.m) + 0.5) / model.m
    return float(np.dot(density, observable(mids)) / model.m)


def ulam_response_fd(
    family: TrigMapFamily,
    observable: Observable,
    h: float = DEFAULT_FD_STEP,
    m: int = DEFAULT_BINS,
    tau: float = 0.0,
) -> float:
    """Central difference of Ulam SRB averages at ``tau +/- h``."""
    plus = ulam_srb_average(build_ulam(family, tau + h, m), observable)
    minus = ulam_srb_average(build_ulam(family, tau - h, m), observable)
    return (plus - minus) / (2.0 * h)


def brute_fixed_points(family: TrigMapFamily, tau: float, n: int, grid: int = 100_000, tol: float = 1e-12):
    """Fixed points of ``T^n`` by scanning ``G(x) = L^n(x) - x`` for integer crossings.

    Raises
    ------
    ValueError
        If the grid is too coarse (``grid < 10 * d**n``).
    ConsistencyError
        If ``G`` is not increasing on the grid or the crossing count is wrong.
    """
    d = family.degree
    expected = d ** n - 1
    if grid < 10 * d ** n:
        raise ValueError(f"grid={grid} too coarse for {d**n} branches")

    def G(x):
        y = np.asarray(x, dtype=float)
        for _ in range(n):
            y = eval_lift(family, tau, y)
        return y - x

    xs = np.linspace(0.0, 1.0, grid + 1)
    gs = G(xs)
    if np.any(np.diff(gs) <= 0):
        raise ConsistencyError("L^n(x) - x is not increasing on the scan grid")
    j0 = int(np.ceil(gs[0]))
    targets = np.arange(j0, j0 + expected, dtype=float)
    cells = np.searchsorted(gs, targets, side="left")
    exact = gs[np.minimum(cells, grid)] == targets
    if np.any(cells > grid) or len(targets) != expected:
        raise ConsistencyError("crossing count mismatch")
    lo = xs[np.maximum(cells - 1, 0)]
    hi = xs[cells]
    roots = np.where(exact, hi, _bisect(G, targets, lo, hi, tol))
    roots = np.where(roots >= 1.0, roots - 1.0, roots)
    return sorted(float(r) for r in roots)
