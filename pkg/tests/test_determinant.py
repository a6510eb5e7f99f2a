from math import factorial, log

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.polynomial import polynomial as P

from dyndet.determinant import (
    det_coefficient_partials,
    det_coefficients,
    det_series,
    eval_det,
    find_smallest_zero,
    geometric_fit,
    tail_estimate,
)
from dyndet.exceptions import ZeroNotBracketedError
from dyndet.map_model import Observable
from dyndet.orbit_traces import TracePartials, trace_table


def exp_series_oracle(b, order):
    """Coefficients of exp(-sum b_n z^n / n) by summing powers of the exponent."""
    s = np.zeros(order + 1)
    for n, bn in enumerate(b[:order], start=1):
        s[n] = -bn / n
    out = np.zeros(order + 1)
    power = np.zeros(order + 1)
    power[0] = 1.0
    for k in range(order + 1):
        out += power / factorial(k)
        power = P.polymul(power, s)[: order + 1]
        power = np.pad(power, (0, order + 1 - len(power)))
    return out


def test_trivial_sequences():
    np.testing.assert_array_equal(det_coefficients([1.0] * 6, 6), [1, -1, 0, 0, 0, 0, 0])
    np.testing.assert_array_equal(det_coefficients([2.0 ** n for n in range(1, 7)], 6), [1, -2, 0, 0, 0, 0, 0])


def test_hand_expansion():
    a = det_coefficients([1.0, 2.0, 3.0], 3)
    np.testing.assert_allclose(a, [1.0, -1.0, -0.5, -1 / 6], rtol=1e-15)
    np.testing.assert_allclose(a, exp_series_oracle([1.0, 2.0, 3.0], 3), rtol=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=8, max_size=8))
def test_matches_exp_series(b):
    np.testing.assert_allclose(det_coefficients(b, 8), exp_series_oracle(b, 8), rtol=1e-9, atol=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=6, max_size=6), st.lists(st.floats(-2, 2), min_size=6, max_size=6))
def test_exp_log_additivity(b1, b2):
    """Traces add when determinants multiply."""
    a1 = det_coefficients(b1, 6)
    a2 = det_coefficients(b2, 6)
    a12 = det_coefficients([x + y for x, y in zip(b1, b2)], 6)
    prod = np.pad(P.polymul(a1, a2), (0, 13))[:7]
    np.testing.assert_allclose(a12, prod, rtol=1e-9, atol=1e-9)


def test_too_few_traces():
    with pytest.raises(ValueError):
        det_coefficients([1.0, 2.0], 3)


def test_partials_doubling_constant_observable(doubling):
    c = 0.8
    s = det_coefficient_partials(trace_table(doubling, Observable.const(c), 6), 6)
    assert s.au[1] == pytest.approx(c, rel=1e-15)
    assert abs(s.au[2]) < 1e-15
    np.testing.assert_allclose(s.au[2:], 0, atol=1e-14)
    assert s.au[0] == s.atau[0] == s.autau[0] == 0.0


def test_partials_sine_family(sine_family, cosine):
    s = det_coefficient_partials(trace_table(sine_family, cosine, 10), 10)
    np.testing.assert_allclose(s.atau[:3], [0.0, 1.0, -1.0], atol=1e-14)
    np.testing.assert_allclose(s.atau[3:], 0, atol=1e-13)
    assert abs(s.atau.sum()) < 1e-13
    # b_1 = exp(-u c) / (1 + tau) from the lone fixed point 0, so only n = 1, 2 survive
    c = 1.5
    g = det_coefficient_partials(trace_table(sine_family, Observable.const(c), 10), 10)
    np.testing.assert_allclose(g.autau[:3], [0.0, -c, 2 * c], atol=1e-14)
    np.testing.assert_allclose(g.autau[3:], 0, atol=1e-12)


def test_partials_match_finite_difference_of_coefficients():
    """d a_n / d b_k by differencing the plain recursion."""
    rng = np.random.default_rng(3)
    rows = [TracePartials(n, *rng.normal(size=4)) for n in range(1, 7)]
    s = det_coefficient_partials(rows, 6)
    h = 1e-6
    b = np.array([r.b for r in rows])
    bu = np.array([r.bu for r in rows])
    fd = (det_coefficients(b + h * bu, 6) - det_coefficients(b - h * bu, 6)) / (2 * h)
    np.testing.assert_allclose(s.au, fd, rtol=1e-6, atol=1e-8)


def test_recursion_residual(sine_family, cosine):
    s = det_coefficient_partials(trace_table(sine_family, cosine, 12, tau=0.05), 12)
    assert s.recursion_residuals().max() < 1e-13


def test_eval_det_examples(doubling):
    s = det_series([1.0] * 8, 8)
    v = eval_det(s, 1.0)
    assert (v.d, v.dz) == (0.0, -1.0)
    assert eval_det(det_series([2.0 ** n for n in range(1, 9)], 8), 0.5).d == 0.0
    c = 0.6
    g = det_coefficient_partials(trace_table(doubling, Observable.const(c), 8), 8)
    assert eval_det(g, 1.0).du == pytest.approx(c, rel=1e-14)


def test_zero_doubling():
    z = find_smallest_zero(det_series([1.0] * 12, 12))
    assert z.z_star == pytest.approx(1.0, abs=1e-12)
    assert abs(z.pressure) < 1e-12
    z = find_smallest_zero(det_series([2.0 ** n for n in range(1, 13)], 12))
    assert z.z_star == pytest.approx(0.5, abs=1e-12)
    assert z.pressure == pytest.approx(log(2), abs=1e-12)


def test_zero_perturbed_family(sine_family, cosine):
    series = {}
    for n_max in (10, 12):
        series[n_max] = det_coefficient_partials(trace_table(sine_family, cosine, n_max, tau=0.05), n_max)
    z12 = find_smallest_zero(series[12]).z_star
    z10 = find_smallest_zero(series[10]).z_star
    assert z12 == pytest.approx(1.0, abs=1e-10)
    assert abs(z12 - z10) < 1e-9
    assert abs(eval_det(series[12], z12).dz) > 1e-3


def test_zero_not_bracketed():
    with pytest.raises(ZeroNotBracketedError):
        find_smallest_zero(det_series([0.0] * 6, 6))


def test_geometric_fit_recovers_rate():
    c = 3.0 * 0.4 ** np.arange(13)
    C, r = geometric_fit(c)
    assert r == pytest.approx(0.4, rel=1e-12)
    assert C == pytest.approx(3.0, rel=1e-10)
    expected_tail = 3.0 * 0.4 ** 13 / 0.6
    assert tail_estimate(c, 1.0) == pytest.approx(expected_tail, rel=1e-10)


def test_tail_terminated_series():
    assert tail_estimate([1.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0]) == 0.0
    assert geometric_fit([1.0, -2.0, 0.0, 0.0, 0.0, 0.0]) == (0.0, 0.0)


def test_tail_divergent():
    assert tail_estimate(1.5 ** np.arange(10), 1.0) == float("inf")
