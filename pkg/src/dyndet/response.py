"""SRB averages and linear response from determinant partials at z = 1.

With ``d(z, u, tau)`` the determinant for the weight ``-u g - log T_tau'``,

    int g dmu_tau             = -d_u / d_z                                (z=1, u=0)
    d/dtau int g dmu_tau      = -d_utau / d_z + d_tauz d_u / d_z^2       (z=1, u=0, tau=0)

Evaluation is at ``z = 1`` exactly; the numerically located zero of ``d`` only
serves as a diagnostic.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from math import fsum

import numpy as np

from .determinant import (
    DEFAULT_N_MAX,
    DetSeries,
    det_coefficient_partials,
    eval_det,
    find_smallest_zero,
    geometric_fit,
    tail_estimate,
)
from .exceptions import ConsistencyError, DegenerateZeroError, ZeroNotBracketedError
from .orbit_traces import trace_table

CONVERGED_TAIL = 1e-6
DEGENERATE_DZ = 1e-6
ZERO_DIAGNOSTIC_TOL = 1e-8
SELF_CHECK_TOL = 1e-14

SERIES_NAMES = ("a", "n_a", "au", "n_atau", "autau")


def _series_coefficients(series: DetSeries) -> dict:
    n = np.arange(series.n_max + 1)
    return {
        "a": series.a,
        "n_a": n * series.a,
        "au": series.au,
        "n_atau": n * series.atau,
        "autau": series.autau,
    }


@dataclass
class ConvergenceReport:
    """Partial sums at z = 1 of every series entering the response formulas."""

    partial_sums: list
    rates: dict
    tails: dict

    @property
    def max_tail(self) -> float:
        return max(self.tails.values())


def convergence_report(series: DetSeries) -> ConvergenceReport:
    coeffs = _series_coefficients(series)
    rows = []
    for n in range(series.n_max + 1):
        row = {"n": n}
        for name, c in coeffs.items():
            row[name] = fsum(c[: n + 1])
        rows.append(row)
    rates = {name: geometric_fit(c)[1] for name, c in coeffs.items()}
    tails = {name: tail_estimate(c, 1.0) for name, c in coeffs.items()}
    return ConvergenceReport(rows, rates, tails)


@dataclass
class ResponseResult:
    srb_average: float
    linear_response: float | None
    tau: float
    n_max: int
    converged: bool
    tails: dict
    rates: dict
    z_star: float | None
    zero_at_one: bool
    partial_sums: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def _ratio_terms(series: DetSeries):
    vals = eval_det(series, 1.0)
    if abs(vals.dz) < DEGENERATE_DZ:
        raise DegenerateZeroError(f"|d_z(1)| = {abs(vals.dz):.3g} is below {DEGENERATE_DZ}")
    return vals


def average_from_series(series: DetSeries) -> float:
    vals = _ratio_terms(series)
    return -vals.du / vals.dz


def response_from_series(series: DetSeries) -> float:
    """Linear response written with the coefficient sums, cross-checked against the raw partials."""
    vals = _ratio_terms(series)
    n = np.arange(series.n_max + 1)
    s_na = fsum(n * series.a)
    s_au = fsum(series.au)
    s_natau = fsum(n * series.atau)
    s_autau = fsum(series.autau)
    summed = -s_autau / s_na + s_natau * s_au / s_na ** 2
    raw = -vals.dutau / vals.dz + vals.dtauz * vals.du / vals.dz ** 2
    if abs(summed - raw) > SELF_CHECK_TOL * max(1.0, abs(summed)):
        raise ConsistencyError(f"response forms disagree: {summed!r} vs {raw!r}")
    return summed


def build_series(family, observable, tau=0.0, n_max=DEFAULT_N_MAX, workers=1) -> DetSeries:
    return det_coefficient_partials(trace_table(family, observable, n_max, tau=tau, workers=workers), n_max)


def srb_average(family, observable, tau: float = 0.0, n_max: int = DEFAULT_N_MAX, *, workers: int = 1) -> float:
    """``int g dmu_tau`` for the absolutely continuous invariant measure of ``T_tau``."""
    return average_from_series(build_series(family, observable, tau, n_max, workers))


def linear_response(family, observable, n_max: int = DEFAULT_N_MAX, *, tau: float = 0.0, workers: int = 1) -> float:
    """``d/dtau int g dmu_tau`` at ``tau`` (the family is re-based there)."""
    return response_from_series(build_series(family, observable, tau, n_max, workers))


def response_report(
    family, observable, tau=0.0, n_max=DEFAULT_N_MAX, *, with_response=True, workers=1
) -> ResponseResult:
    """Average, optional response, and convergence diagnostics in one pass."""
    series = build_series(family, observable, tau, n_max, workers)
    report = convergence_report(series)
    avg = average_from_series(series)
    resp = response_from_series(series) if with_response else None
    relevant = SERIES_NAMES if with_response else ("a", "n_a", "au")
    tails = {k: report.tails[k] for k in relevant}
    try:
        z_star = find_smallest_zero(series).z_star
    except ZeroNotBracketedError:
        z_star = None
    return ResponseResult(
        srb_average=avg,
        linear_response=resp,
        tau=float(tau),
        n_max=n_max,
        converged=all(t < CONVERGED_TAIL for t in tails.values()),
        tails=tails,
        rates={k: report.rates[k] for k in relevant},
        z_star=z_star,
        zero_at_one=z_star is not None and abs(z_star - 1.0) < ZERO_DIAGNOSTIC_TOL,
        partial_sums=report.partial_sums,
    )
