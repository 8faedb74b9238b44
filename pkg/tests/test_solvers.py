"""Solver tests.

Where every later self exercises above the current one, each value function
is a single power-log series below its threshold and the threshold obeys a
closed-form fixed-point equation. Those equations are coded here directly
from the model's first-order conditions as an independent check.
"""

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from strategies import model_params
from vcexit.params import AgentType, DiscountSpec, ModelParams, beta_root
from vcexit.series import PiecewiseSeries
from vcexit.solvers import (
    BranchDegeneracy,
    CoefficientBlowup,
    RootNotBracketed,
    consistent_threshold,
    ode_residual,
    solve,
    solve_consistent,
    solve_critical_only,
    solve_naive,
    solve_self,
    solve_sophisticated,
)
import vcexit.solvers as solvers_mod

P = ModelParams()


def F(p, x):
    """Consistent option value, intrinsic above x*."""
    xs = consistent_threshold(p)
    b1 = beta_root(p)
    return np.where(x < xs, (x / xs) ** b1 * (p.eta * xs - p.theta), p.eta * x - p.theta)


def two_stage_rhs(p, b, dp, x):
    return (b * p.theta + (b - beta_root(p)) * dp * F(p, x)) / (p.eta * (b - 1))


def next_coefficient(p, d, x_next, b_next):
    """x^b coefficient of the continuation left by a two-stage self."""
    return x_next**-b_next * (d.delta_f * (p.eta * x_next - p.theta) - d.delta_p * F(p, x_next))


def three_stage_rhs(p, d, x, x_next, lam_next):
    """Threshold map of a self whose successor is a two-stage self."""
    b1, bs, bn = beta_root(p), beta_root(p, d.lambda_f), beta_root(p, lam_next)
    Y = next_coefficient(p, d, x_next, bn)
    k = p.eta * (bs - 1)
    base = bs * p.theta / k + (bs - b1) / k * d.delta_p * F(p, x)
    if lam_next == d.lambda_f:
        slope = p.alpha + 0.5 * p.sigma**2 * (2 * bs - 1)
        R1 = -d.lambda_f * Y / slope
        return base - R1 / k * x**bs
    eps = d.lambda_f / (d.lambda_f - lam_next)
    return base + (bs - bn) / k * eps * Y * x**bn


# ---------------------------------------------------------------- consistent


def test_consistent_closed_form():
    s = solve_consistent(P)
    b1 = math.sqrt(3)
    assert s.threshold == pytest.approx(b1 * 9.952 / ((b1 - 1) * 5.4), rel=1e-14)
    assert s.threshold == pytest.approx(4.3605, abs=5e-5)
    xs = s.threshold
    assert s.value(xs) == pytest.approx(P.eta * xs - P.theta, rel=1e-14)
    assert s.value(1.0) == pytest.approx((1 / xs) ** b1 * (P.eta * xs - P.theta), rel=1e-14)
    assert s.value(6.0) == pytest.approx(P.eta * 6 - P.theta)


def test_consistent_threshold_tends_to_breakeven_as_volatility_vanishes():
    # without drift the root blows up as sigma -> 0 and the option value vanishes
    gaps = []
    for sigma in (0.05, 0.01, 0.002):
        p = P.replace(alpha=0.0, sigma=sigma)
        gaps.append(consistent_threshold(p) / (p.theta / p.eta) - 1)
    assert gaps[0] > gaps[1] > gaps[2] > 0
    assert gaps[-1] < 0.02


def test_consistent_threshold_with_drift_keeps_a_waiting_premium():
    # with alpha > 0 the root tends to rho / alpha instead
    p = P.replace(sigma=1e-3)
    b = p.rho / p.alpha
    assert consistent_threshold(p) == pytest.approx(b / (b - 1) * p.theta / p.eta, rel=1e-3)


# ------------------------------------------------------- closed-form checks


@pytest.mark.parametrize("dp, lam_e", [(0.3, 1.0), (0.0, 0.5), (0.9, 0.05), (0.6, 4.0)])
def test_critical_fixed_point_and_value(dp, lam_e):
    d = DiscountSpec(delta_f=1.0, delta_p=dp, lambda_e=lam_e)
    s = solve_critical_only(P, d)
    xg = s.threshold
    b2 = beta_root(P, lam_e)
    assert xg == pytest.approx(two_stage_rhs(P, b2, dp, xg), rel=1e-12)
    xs = consistent_threshold(P)
    b1 = beta_root(P)
    x = np.linspace(0.3, xg, 20)
    G = P.eta * (b1 - 1) / (b2 - b1) * (xs - xg) * (x / xg) ** b2 + dp * F(P, x)
    np.testing.assert_allclose(s.value(x), G, rtol=1e-11)


ORDERED_NAIVE = [
    DiscountSpec(delta_f=0.7, delta_p=0.7, lambda_f=1.0, lambda_pn=1.0),
    DiscountSpec(delta_f=0.7, delta_p=0.7, lambda_f=1.0, lambda_pn=0.5),
    DiscountSpec(delta_f=0.7, delta_p=0.6, lambda_f=1.0, lambda_pn=0.2),
    DiscountSpec(delta_f=0.7, delta_p=0.7, lambda_f=0.5, lambda_pn=0.5 / 3),
]


@pytest.mark.parametrize("d", ORDERED_NAIVE)
def test_naive_fixed_points(d):
    s = solve_naive(P, d)
    x0, x1, xe = s.thresholds
    assert x0 <= x1 < xe  # single-series regime
    assert x1 == pytest.approx(two_stage_rhs(P, beta_root(P, d.lambda_pn), d.delta_p, x1), rel=1e-12)
    assert x0 == pytest.approx(three_stage_rhs(P, d, x0, x1, d.lambda_pn), rel=1e-12)
    expected = "equal" if d.lambda_pn == d.lambda_f else "distinct"
    assert s.diagnostics["branch"] == expected


@pytest.mark.parametrize(
    "d",
    [
        DiscountSpec(delta_f=0.7, delta_p=0.7, lambda_f=0.5, lambda_ps=0.3, num_selves=6),
        DiscountSpec.coupled(0.7, 0.7, 0.5, 6),
    ],
)
def test_sophisticated_fixed_points(d):
    s = solve_sophisticated(P, d)
    th = s.thresholds
    assert all(a <= b for a, b in zip(th, th[1:]))
    E = d.E
    b1, b4, b5 = beta_root(P), beta_root(P, d.lambda_f), beta_root(P, d.lambda_ps)
    # self E-1 faces a two-stage problem
    assert th[E - 1] == pytest.approx(two_stage_rhs(P, b5, d.delta_p, th[E - 1]), rel=1e-12)
    # self E-2 faces a three-stage problem
    assert th[E - 2] == pytest.approx(three_stage_rhs(P, d, th[E - 2], th[E - 1], d.lambda_ps), rel=1e-12)
    # earlier selves: smooth pasting combined with value matching
    k = P.eta * (b4 - 1)
    for n in range(E - 2):
        x = th[n]
        piece = s.selves[n].value.pieces[0]
        a5 = piece.coefficient(b5) if b5 != b4 else 0.0
        logs = sum(
            j * piece.coefficient(b4, j) * math.log(x) ** (j - 1) * x**b4
            for j in range(1, piece.max_log_power + 1)
        )
        rhs = b4 * P.theta / k + (b4 - b1) / k * d.delta_p * F(P, x) + (b4 - b5) / k * a5 * x**b5 - logs / k
        assert x == pytest.approx(rhs, rel=1e-11)


def _literal_log_coefficients(next_coefs, lam, p, b4):
    """Log-power coefficients of a continuation from those of the next one,
    via the explicit sum over higher powers."""
    mu = -b4 / (p.sigma**2 * b4**2 / 2 + p.rho + lam)
    top = len(next_coefs)
    w = {}
    for k in range(1, top + 1):
        total = mu * next_coefs[k - 1]
        for n in range(0, top - k + 1):
            if k + n >= len(next_coefs):
                break
            prod = math.prod(k + m for m in range(n + 1))
            total += mu * (p.sigma**2 * mu / 2) ** (n + 1) * next_coefs[k + n] * prod
        w[k] = lam / k * total
    return w


def test_continuation_log_coefficients_match_explicit_sum():
    d = DiscountSpec(delta_f=0.7, delta_p=0.7, lambda_f=0.5, lambda_ps=0.3, num_selves=6)
    s = solve_sophisticated(P, d)
    b4 = beta_root(P, d.lambda_f)
    for n in range(1, d.E - 1):
        cont = s.selves[n].continuation.pieces[0]
        nxt = s.selves[n + 1].continuation.pieces[0]
        next_coefs = [nxt.coefficient(b4, k) for k in range(nxt.max_log_power + 1)]
        if not any(next_coefs):
            continue
        expected = _literal_log_coefficients(next_coefs, d.lambda_f, P, b4)
        for k, w in expected.items():
            assert cont.coefficient(b4, k) == pytest.approx(w, rel=1e-10, abs=1e-300)
        # value and continuation share every log coefficient except the free one
        val = s.selves[n].value.pieces[0]
        for k in range(1, cont.max_log_power + 1):
            assert val.coefficient(b4, k) == pytest.approx(cont.coefficient(b4, k), rel=1e-12)


def test_value_series_has_single_lowest_exponent_term():
    d = DiscountSpec.coupled(0.7, 0.5, 0.5, 5)
    for agent in (AgentType.CRITICAL_ONLY, AgentType.NAIVE, AgentType.SOPHISTICATED):
        for sf in solve(agent, P, d).selves[:-1]:
            low = sf.value.pieces[0]
            assert low.exponents[0] == pytest.approx(beta_root(P))
            assert sum(1 for _, b, _ in low.terms if b == low.exponents[0]) == 1


# ------------------------------------------------------- structural limits


def test_two_self_sophisticated_equals_critical_with_matching_intensity():
    d = DiscountSpec(delta_f=0.8, delta_p=0.4, lambda_f=2.0, lambda_ps=0.7, num_selves=2)
    soph = solve_sophisticated(P, d)
    crit = solve_critical_only(P, d.replace(lambda_e=0.7))
    assert soph.thresholds == pytest.approx(crit.thresholds, rel=1e-14)


def test_no_wedge_gives_consistent_thresholds():
    d = DiscountSpec(delta_f=1.0, delta_p=1.0, lambda_f=0.7, lambda_pn=0.3, lambda_ps=1.2, num_selves=5)
    xs = consistent_threshold(P)
    for agent in (AgentType.NAIVE, AgentType.SOPHISTICATED):
        for x in solve(agent, P, d).thresholds:
            assert x == pytest.approx(xs, rel=1e-6)


def test_critical_limit_approaches_consistent():
    d = DiscountSpec(delta_f=1.0, delta_p=0.999, lambda_e=1e-6)
    xs = consistent_threshold(P)
    assert abs(solve_critical_only(P, d).threshold - xs) / xs < 1e-3
    d = DiscountSpec(delta_f=1.0, delta_p=1.0, lambda_e=1e-6)
    assert abs(solve_critical_only(P, d).threshold - xs) / xs < 1e-4


def test_equal_intensity_model_is_below_consistent():
    d = DiscountSpec(delta_f=0.7, delta_p=0.7, lambda_f=1.0, lambda_pn=0.5, lambda_e=0.5)
    assert solve_naive(P, d).threshold < consistent_threshold(P)


# ------------------------------------------------------------- branch logic


@pytest.mark.parametrize("agent, field", [("naive", "lambda_pn"), ("sophisticated", "lambda_ps")])
@pytest.mark.parametrize("num_selves", [3, 6, 9])
def test_branch_continuity(agent, field, num_selves):
    base = DiscountSpec(delta_f=0.7, delta_p=0.3, lambda_f=1.0, lambda_pn=1.0, lambda_ps=1.0, num_selves=num_selves)
    fn = solve_naive if agent == "naive" else solve_sophisticated
    tied = fn(P, base)
    assert tied.diagnostics["branch"] == "equal"
    for bump in (1 + 1e-6, 1 - 1e-6, 1 + 2e-8):
        near = fn(P, base.replace(**{field: bump}), branch="distinct")
        assert near.diagnostics["branch"] == "distinct"
        np.testing.assert_allclose(near.thresholds, tied.thresholds, rtol=1e-4)


def test_forcing_distinct_branch_inside_tie_is_rejected():
    d = DiscountSpec(lambda_f=1.0, lambda_pn=1.0 + 1e-10, lambda_ps=1.0)
    with pytest.raises(BranchDegeneracy):
        solve_naive(P, d, branch="distinct")
    with pytest.raises(BranchDegeneracy):
        solve_sophisticated(P, d, branch="distinct")
    assert solve_naive(P, d).diagnostics["branch"] == "equal"


def test_equal_branch_forced_off_tie_is_rejected():
    d = DiscountSpec(lambda_f=1.0, lambda_pn=0.5)
    with pytest.raises(ValueError):
        solve_naive(P, d, branch="equal")


# ------------------------------------------------------------ error paths


def test_root_not_bracketed_reports_bracket():
    terminal = solve_consistent(P).selves[0].value
    rich = PiecewiseSeries(terminal.breaks, tuple(pc * 1.5 for pc in terminal.pieces))
    with pytest.raises(RootNotBracketed) as info:
        solve_self(P, rich, 1.0, 2, None)
    err = info.value
    assert err.self_index == 2
    assert err.lo == pytest.approx(P.theta / P.eta * (1 + 1e-9))
    assert err.hi == pytest.approx(consistent_threshold(P))
    assert "self 2" in str(err)


def test_coefficient_guard(monkeypatch):
    monkeypatch.setattr(solvers_mod, "COEFFICIENT_LIMIT", 1e-3)
    with pytest.raises(CoefficientBlowup, match="self"):
        solve_sophisticated(P, DiscountSpec())


# --------------------------------------------------------- property checks


@st.composite
def discount_specs(draw):
    df = draw(st.floats(0.3, 0.99))
    return DiscountSpec(
        delta_f=df,
        delta_p=draw(st.floats(0.0, df)),
        lambda_f=draw(st.floats(0.1, 4.0)),
        lambda_pn=draw(st.floats(0.05, 4.0)),
        lambda_ps=draw(st.floats(0.05, 4.0)),
        lambda_e=draw(st.floats(0.05, 4.0)),
        num_selves=draw(st.integers(2, 6)),
    )


@settings(max_examples=60, deadline=None)
@given(discount_specs())
def test_early_exit(d):
    xs = consistent_threshold(P)
    for agent in (AgentType.CRITICAL_ONLY, AgentType.NAIVE, AgentType.SOPHISTICATED):
        sol = solve(agent, P, d)
        assert sol.threshold < xs
        assert all(x > P.theta / P.eta for x in sol.thresholds)


@settings(max_examples=40, deadline=None)
@given(model_params(), discount_specs())
def test_residuals_on_random_draws(p, d):
    for agent in AgentType:
        try:
            sol = solve(agent, p, d)
        except RootNotBracketed:
            assume(False)
        diag = sol.diagnostics
        assert max(diag["value_matching"]) < 1e-9
        assert max(diag["smooth_pasting"]) < 1e-9
        assert max(diag["residuals"]) < 1e-9


SMOOTH_CASES = [
    (AgentType.CRITICAL_ONLY, DiscountSpec()),
    (AgentType.NAIVE, DiscountSpec(delta_f=0.7, delta_p=0.3)),
    (AgentType.NAIVE, DiscountSpec(delta_f=0.7, delta_p=0.2, lambda_pn=0.3)),
    (AgentType.SOPHISTICATED, DiscountSpec.coupled(0.7, 0.4, 0.5, 6)),
    (AgentType.SOPHISTICATED, DiscountSpec(delta_f=0.6, delta_p=0.3, lambda_f=2.0, lambda_ps=0.5, num_selves=5)),
]


@pytest.mark.parametrize("agent, d", SMOOTH_CASES)
def test_smooth_pasting_by_finite_difference(agent, d):
    sol = solve(agent, P, d)
    for k, x in enumerate(sol.thresholds):
        # the option-region series is smooth through x, so a central difference is exact to O(h^2)
        piece = sol.selves[k].value.piece_at(x * (1 - 1e-12))
        h = 1e-5 * x
        fd = (piece(x + h) - piece(x - h)) / (2 * h)
        assert fd == pytest.approx(P.eta, rel=1e-7)
        # one-sided difference on the value itself: O(h) error from the jump in curvature
        h = 1e-7 * x
        assert (sol.value(x, k) - sol.value(x - h, k)) / h == pytest.approx(P.eta, rel=1e-5)
        assert sol.value(x, k) == pytest.approx(P.eta * x - P.theta, abs=1e-9 * P.theta)


@pytest.mark.parametrize("agent, d", SMOOTH_CASES)
def test_ode_residuals(agent, d):
    sol = solve(agent, P, d)
    for s in sol.selves:
        if s.forcing is None:
            continue
        x = np.geomspace(P.theta / P.eta * 0.1, s.threshold, 100, endpoint=False)
        for which in ("value", "continuation"):
            if which == "continuation" and s.continuation is None:
                continue
            res, v = ode_residual(s, P, x, which=which)
            assert np.max(np.abs(res) / (P.rho * np.abs(v))) < 1e-8


def test_continuation_value_matching():
    d = DiscountSpec.coupled(0.7, 0.3, 0.5, 6)
    sol = solve_sophisticated(P, d)
    for s in sol.selves[1:-1]:
        x = s.threshold
        assert s.continuation(x) == pytest.approx(d.delta_f * (P.eta * x - P.theta), rel=1e-12)


def test_unordered_thresholds_are_handled():
    # the naive self 0 waits longer than self 1 here, so its continuation
    # switches to intrinsic value above x_N,1
    d = DiscountSpec(delta_f=0.7, delta_p=0.18, lambda_f=1.0, lambda_pn=1.0, lambda_e=0.5)
    sol = solve_naive(P, d)
    x0, x1, _ = sol.thresholds
    assert x0 > x1
    assert sol.diagnostics["pieces"][0] == 2
    assert not sol.diagnostics["nondecreasing"]


def test_solve_requires_discount_for_inconsistent_agents():
    with pytest.raises(ValueError):
        solve("naive", P)
    assert solve("consistent", P).thresholds == (consistent_threshold(P),)
