"""Dynamical determinants, SRB averages and linear response for expanding circle maps."""
from .determinant import (
    DetSeries,
    det_coefficient_partials,
    det_coefficients,
    det_series,
    eval_det,
    find_smallest_zero,
)
from .exceptions import (
    ConsistencyError,
    ConvergenceError,
    DegenerateZeroError,
    DomainError,
    InputError,
    NotExpandingError,
    ZeroNotBracketedError,
)
from .map_model import Observable, TrigMapFamily, eval_jet, eval_lift, eval_tau_jet, expansion_bound
from .oracles import brute_fixed_points, build_ulam, stationary_density, ulam_response_fd, ulam_srb_average
from .orbit_traces import flat_trace, orbit_jet, trace_b, trace_b_partials, trace_table
from .periodic_points import branch_partition, enumerate_fixed_points, inverse_branch_point
from .response import convergence_report, linear_response, response_report, srb_average

__version__ = "0.1.0"
