import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vcexit.params import ModelParams, beta_negative_root, beta_root
from vcexit.series import PiecewiseSeries, PowerLogSeries, forced_solution, particular_solution
from vcexit.solvers import eval_value


def generator(fn, p, lam, x):
    d1 = fn.derivative()
    d2 = d1.derivative()
    return 0.5 * p.sigma**2 * x**2 * d2(x) + p.alpha * x * d1(x) - (p.rho + lam) * fn(x)


def test_eval_examples():
    assert eval_value(PowerLogSeries.monomial(1.0, 2.0), 3.0) == 9.0
    assert eval_value(PowerLogSeries.monomial(1.0, 1.0, 1), 1.0) == 0.0
    with pytest.raises(ValueError):
        eval_value(PowerLogSeries.monomial(1.0, 2.0), 0.0)
    with pytest.raises(ValueError):
        eval_value(PowerLogSeries.monomial(1.0, 2.0), np.array([1.0, -2.0]))


def test_terms_merge_and_cancel():
    s = PowerLogSeries(((1.0, 2.0, 1), (2.0, 2.0, 1), (3.0, 1.5, 0), (-3.0, 1.5, 0)))
    assert s.terms == ((3.0, 2.0, 1),)
    assert (s - s).terms == ()
    with pytest.raises(ValueError):
        PowerLogSeries(((1.0, 1.0, -1),))


def test_groups_round_trip():
    s = PowerLogSeries(((1.0, 2.5, 0), (0.5, 2.5, 2), (-1.0, 1.0, 0)))
    assert PowerLogSeries.from_groups(s.groups()) == s
    assert s.max_log_power == 2
    assert s.coefficient(2.5, 2) == 0.5 and s.coefficient(2.5, 1) == 0.0


@settings(max_examples=100, deadline=None)
@given(
    st.lists(
        st.tuples(st.floats(-3, 3), st.floats(-2, 6), st.integers(0, 3)),
        min_size=1,
        max_size=5,
    ),
    st.floats(0.2, 5.0),
)
def test_derivative_matches_finite_difference(terms, x):
    s = PowerLogSeries(tuple(terms))
    h = 1e-6 * x
    fd = (s(x + h) - s(x - h)) / (2 * h)
    scale = max(1.0, max(abs(s(x + h)), abs(s(x - h))) / x)
    assert abs(s.derivative()(x) - fd) <= 1e-6 * scale


@settings(max_examples=100, deadline=None)
@given(st.floats(0.0, 4.0), st.floats(-1.0, 1.0), st.floats(-1.0, 1.0), st.floats(0.3, 3.0))
def test_particular_solution_non_resonant(lam, c0, c1, x):
    p = ModelParams()
    b1 = beta_root(p, 0.0)
    forcing = PowerLogSeries(((c0, b1, 0), (c1, b1, 1), (0.7, 1.0, 0), (-0.2, 0.0, 0)))
    sol = particular_solution(forcing, lam, p)
    lhs = generator(sol, p, lam, x)
    assert lhs == pytest.approx(-lam * forcing(x), rel=1e-9, abs=1e-11)


@pytest.mark.parametrize("log_power", [0, 1, 3])
def test_particular_solution_resonant_adds_a_log(log_power):
    p = ModelParams()
    lam = 0.5
    b = beta_root(p, lam)
    forcing = PowerLogSeries.monomial(2.0, b, log_power)
    sol = particular_solution(forcing, lam, p)
    assert sol.max_log_power == log_power + 1
    x = np.linspace(0.3, 4.0, 25)
    np.testing.assert_allclose(generator(sol, p, lam, x), -lam * forcing(x), rtol=1e-9, atol=1e-12)


def test_resonant_leading_coefficient():
    # for a pure x^b forcing at a root b the log coefficient is -lam / Q'(b)
    p = ModelParams()
    lam = 0.5
    b = beta_root(p, lam)
    sol = particular_solution(PowerLogSeries.monomial(1.0, b), lam, p)
    slope = p.alpha + 0.5 * p.sigma**2 * (2 * b - 1)
    assert sol.coefficient(b, 1) == pytest.approx(-lam / slope, rel=1e-14)


def test_negative_root_resonance_is_detected():
    p = ModelParams()
    lam = 0.3
    bn = beta_negative_root(p, lam)
    sol = particular_solution(PowerLogSeries.monomial(1.0, bn), lam, p)
    x = np.linspace(0.5, 3.0, 9)
    np.testing.assert_allclose(generator(sol, p, lam, x), -lam * x**bn, rtol=1e-9)


def _step_forcing(p):
    low = PowerLogSeries.monomial(0.3, beta_root(p, 0.0))
    mid = PowerLogSeries.affine(2.0, -3.0)
    high = PowerLogSeries.affine(5.0, -9.0)
    return PiecewiseSeries((2.0, 3.5), (low, mid, high))


def test_forced_solution_is_c1_and_solves_each_piece():
    p = ModelParams()
    lam = 0.8
    forcing = _step_forcing(p)
    W = forced_solution(forcing, lam, p)
    dW = W.derivative()
    for c in forcing.breaks:
        left, right = W.pieces[W.piece_index(c)], W.pieces[W.piece_index(c) + 1]
        assert left(c) == pytest.approx(right(c), rel=1e-12)
        assert left.derivative()(c) == pytest.approx(right.derivative()(c), rel=1e-12)
        assert dW(c * (1 - 1e-9)) == pytest.approx(dW(c * (1 + 1e-9)), rel=1e-6)
    for x in (0.5, 1.9, 2.7, 3.4, 4.5, 8.0):
        piece = W.piece_at(x)
        rhs = -lam * forcing.piece_at(x)(x)
        assert generator(piece, p, lam, x) == pytest.approx(rhs, rel=1e-9)


def test_forced_solution_has_no_negative_power_below_first_break():
    p = ModelParams()
    W = forced_solution(_step_forcing(p), 0.8, p)
    assert all(b > 0 for b in W.pieces[0].exponents)


def test_piecewise_evaluation_and_truncate():
    a = PowerLogSeries.monomial(1.0, 1.0)
    b = PowerLogSeries.monomial(10.0, 0.0)
    pw = PiecewiseSeries((2.0,), (a, b))
    np.testing.assert_allclose(pw(np.array([1.0, 2.0, 3.0])), [1.0, 2.0, 10.0])
    cut = pw.truncate(1.5, PowerLogSeries.monomial(-1.0, 0.0))
    assert cut.breaks == (1.5,)
    assert cut(3.0) == -1.0 and cut(1.0) == 1.0
    with pytest.raises(ValueError):
        PiecewiseSeries((2.0, 1.0), (a, b, a))
    with pytest.raises(ValueError):
        PiecewiseSeries((2.0,), (a,))


@pytest.mark.parametrize("gap", [1e-9, 1e-6, 1e-3, 0.015])
def test_near_resonant_forcing_is_solved_around_the_root(gap):
    p = ModelParams()
    lam = 0.5
    b = beta_root(p, lam)
    forcing = PowerLogSeries(((1.0, b + gap, 0), (0.3, b + gap, 1)))
    sol = particular_solution(forcing, lam, p)
    assert sol.exponents == (b,)
    x = np.geomspace(0.05, 20.0, 40)
    np.testing.assert_allclose(generator(sol, p, lam, x), -lam * forcing(x), rtol=1e-9, atol=1e-12)
