"""Exit thresholds and value functions for the four agent types.

All time-inconsistent agents reduce to the same backward induction over a
chain of selves. Self ``n`` lives for an exponential time with intensity
``lam_n``; while alive it solves

    L_lam_n V_n = -lam_n * C_{n+1}

with value matching and smooth pasting against ``eta*x - theta`` at its
threshold. ``C_{n+1}`` is what an earlier self expects to collect once self
``n+1`` is in charge: the same ODE, value matching against
``delta_f * (eta*x - theta)`` at self ``n+1``'s threshold and no smooth
pasting. The chain ends with ``delta_p * F``, the terminal self's option
discounted by the post-expiry factor.

The continuation is only a power-log series below the next self's
threshold; above it the next self exits at once. Forcing is therefore
piecewise and the forced part ``W_n`` is assembled interval by interval
(see :func:`vcexit.series.forced_solution`). Writing ``V = W + A x**b``,
value matching fixes ``A`` and smooth pasting reduces to

    g(x) = x W'(x) + b (eta x - theta - W(x)) - eta x = 0,

which is the fixed-point form ``x = [b theta + b W - x W'] / (eta (b - 1))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.optimize import brentq

from .params import AgentType, DiscountSpec, ModelParams, beta_root
from .series import PiecewiseSeries, PowerLogSeries, forced_solution

TIE_RTOL = 1e-8
COEFFICIENT_LIMIT = 1e250
SCAN_POINTS = 65
LOWER_BRACKET_FACTOR = 1.0 + 1e-9

Branch = Literal["auto", "distinct"]


class SolverError(RuntimeError):
    """Base class for threshold solver failures."""


class RootNotBracketed(SolverError):
    def __init__(self, self_index: int, lo: float, hi: float, g_lo: float, g_hi: float):
        self.self_index = self_index
        self.lo, self.hi = lo, hi
        super().__init__(
            f"self {self_index}: threshold condition has no sign change on "
            f"[{lo:.10g}, {hi:.10g}] (g={g_lo:.3g} .. {g_hi:.3g})"
        )


class BranchDegeneracy(SolverError):
    pass


class CoefficientBlowup(SolverError):
    pass


@dataclass(frozen=True)
class SelfSolution:
    """One self's threshold with the functions that produced it.

    ``value`` is the self's own option value over (0, inf). ``continuation``
    is what earlier selves expect from this self onwards (``None`` for self
    0). ``forcing`` is the continuation of the following self that enters
    this self's ODE with weight ``intensity``.
    """

    index: int
    threshold: float
    value: PiecewiseSeries
    continuation: PiecewiseSeries | None
    intensity: float | None = None
    forcing: PiecewiseSeries | None = None
    iterations: int = 0
    candidates: int = 1
    residual: float = 0.0


@dataclass(frozen=True)
class ThresholdSolution:
    agent_type: AgentType
    selves: tuple[SelfSolution, ...]
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def thresholds(self) -> tuple[float, ...]:
        return tuple(s.threshold for s in self.selves)

    @property
    def self_indices(self) -> tuple[int, ...]:
        return tuple(s.index for s in self.selves)

    @property
    def value_functions(self) -> tuple[PiecewiseSeries, ...]:
        return tuple(s.value for s in self.selves)

    @property
    def threshold(self) -> float:
        """Self 0's threshold."""
        return self.selves[0].threshold

    def value(self, x, self_position: int = 0):
        return eval_value(self.selves[self_position].value, x)


def eval_value(fn: PowerLogSeries | PiecewiseSeries, x):
    """Evaluate a series (or piecewise series) at ``x > 0``."""
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise ValueError("value functions are defined for x > 0 only")
    return fn(x)


def consistent_threshold(p: ModelParams) -> float:
    b1 = beta_root(p, 0.0)
    return b1 * p.theta / ((b1 - 1.0) * p.eta)


def _payoff(p: ModelParams, scale: float = 1.0) -> PowerLogSeries:
    return PowerLogSeries.affine(scale * p.eta, -scale * p.theta)


def _terminal_self(p: ModelParams, index: int) -> SelfSolution:
    b1 = beta_root(p, 0.0)
    xs = consistent_threshold(p)
    f_below = PowerLogSeries.monomial((p.eta * xs - p.theta) * xs**-b1, b1)
    value = PiecewiseSeries((xs,), (f_below, _payoff(p)))
    return SelfSolution(index=index, threshold=xs, value=value, continuation=None)


def _guard(series: PiecewiseSeries, index: int) -> None:
    big = series.max_abs_coefficient()
    if not math.isfinite(big) or big > COEFFICIENT_LIMIT:
        raise CoefficientBlowup(
            f"self {index}: coefficient magnitude {big:.3g} exceeds {COEFFICIENT_LIMIT:.0e}"
        )


def solve_self(
    p: ModelParams,
    forcing: PiecewiseSeries,
    lam: float,
    index: int,
    continuation_discount: float | None,
) -> SelfSolution:
    """Optimal threshold of a self with death intensity ``lam``.

    ``forcing`` is the continuation value handed over at death. When several
    local optima exist on the bracket the one with the largest option
    coefficient wins, since it dominates the others at every lower x.
    """
    eta, theta = p.eta, p.theta
    b = beta_root(p, lam)
    W = forced_solution(forcing, lam, p)
    dW = W.derivative()

    def g(x: float) -> float:
        return x * dW(x) + b * (eta * x - theta - W(x)) - eta * x

    def coef(x: float) -> float:
        return (eta * x - theta - W(x)) * x**-b

    lo = theta / eta * LOWER_BRACKET_FACTOR
    hi = consistent_threshold(p)
    grid = np.linspace(lo, hi, SCAN_POINTS)
    inner = [c for c in forcing.breaks if lo < c < hi]
    grid = np.unique(np.concatenate([grid, inner]))
    gv = np.array([g(x) for x in grid])

    roots: list[float] = []
    iterations = 0
    for i in range(len(grid) - 1):
        if gv[i] < 0.0 <= gv[i + 1]:
            if gv[i + 1] == 0.0:
                roots.append(float(grid[i + 1]))
                continue
            x, info = brentq(g, grid[i], grid[i + 1], xtol=1e-15, rtol=1e-15, full_output=True)
            iterations += info.iterations
            roots.append(x)
    # exercise at hi itself when the smooth-pasting gap closes there (no wedge)
    if gv[-1] < 0.0 and abs(gv[-1]) <= 1e-10 * eta * hi:
        roots.append(float(hi))
    if not roots:
        raise RootNotBracketed(index, lo, hi, gv[0], gv[-1])
    x_bar = max(roots, key=coef)

    A = coef(x_bar)
    value = W.truncate(x_bar, _payoff(p))
    value = value.add_to_pieces(PowerLogSeries.monomial(A, b), upto=len(value.pieces) - 1)
    _guard(value, index)
    continuation = None
    if continuation_discount is not None:
        B = (continuation_discount * (eta * x_bar - theta) - W(x_bar)) * x_bar**-b
        continuation = W.truncate(x_bar, _payoff(p, continuation_discount))
        continuation = continuation.add_to_pieces(
            PowerLogSeries.monomial(B, b), upto=len(continuation.pieces) - 1
        )
        _guard(continuation, index)
    residual = abs(g(x_bar)) / (eta * (b - 1.0) * x_bar)
    return SelfSolution(
        index=index,
        threshold=float(x_bar),
        value=value,
        continuation=continuation,
        intensity=lam,
        forcing=forcing,
        iterations=iterations,
        candidates=len(roots),
        residual=residual,
    )


def solve_chain(
    p: ModelParams,
    intensities: tuple[float, ...],
    labels: tuple[int, ...],
    delta_f: float,
    delta_p: float,
) -> tuple[SelfSolution, ...]:
    """Backward induction over non-terminal selves followed by the terminal one.

    ``intensities[i]`` is the death intensity of the self labelled
    ``labels[i]``; ``labels[-1]`` names the terminal self.
    """
    terminal = _terminal_self(p, labels[-1])
    forcing = PiecewiseSeries(
        terminal.value.breaks, tuple(pc * delta_p for pc in terminal.value.pieces)
    )
    solved = [terminal]
    for pos in range(len(intensities) - 1, -1, -1):
        sol = solve_self(
            p,
            forcing,
            intensities[pos],
            labels[pos],
            continuation_discount=delta_f if pos > 0 else None,
        )
        solved.append(sol)
        forcing = sol.continuation
    return tuple(reversed(solved))


def _diagnostics(selves: tuple[SelfSolution, ...], p: ModelParams, branch: str | None) -> dict:
    eta, theta = p.eta, p.theta
    vm, sp = [], []
    for s in selves:
        x = s.threshold
        piece = s.value.piece_at(x)
        vm.append(abs(piece(x) - (eta * x - theta)) / theta)
        sp.append(abs(piece.derivative()(x) - eta) / eta)
    th = [s.threshold for s in selves]
    return {
        "branch": branch,
        "iterations": [s.iterations for s in selves],
        "candidates": [s.candidates for s in selves],
        "residuals": [s.residual for s in selves],
        "value_matching": vm,
        "smooth_pasting": sp,
        "pieces": [len(s.value.pieces) - 1 for s in selves],
        "nondecreasing": all(a <= b for a, b in zip(th, th[1:])),
    }


def _tied(lam_f: float, lam_p: float) -> bool:
    return abs(lam_f - lam_p) <= TIE_RTOL * lam_f


def _terminal_intensity(lam_f: float, lam_p: float, branch: Branch, name: str) -> tuple[float, str]:
    if branch not in ("auto", "distinct"):
        raise ValueError(f"unknown branch {branch!r}")
    if _tied(lam_f, lam_p):
        if branch == "distinct":
            raise BranchDegeneracy(
                f"|lambda_f - {name}| = {abs(lam_f - lam_p):.3g} is within the tie tolerance; "
                "the distinct-intensity solution is singular here"
            )
        return lam_f, "equal"
    return lam_p, "distinct"


def solve_consistent(p: ModelParams) -> ThresholdSolution:
    selves = (_terminal_self(p, 0),)
    return ThresholdSolution(AgentType.CONSISTENT, selves, _diagnostics(selves, p, None))


def solve_critical_only(p: ModelParams, d: DiscountSpec) -> ThresholdSolution:
    selves = solve_chain(p, (d.lambda_e,), (0, d.E), d.delta_f, d.delta_p)
    return ThresholdSolution(AgentType.CRITICAL_ONLY, selves, _diagnostics(selves, p, None))


def solve_naive(p: ModelParams, d: DiscountSpec, branch: Branch = "auto") -> ThresholdSolution:
    """Self 0 believes selves 1..E-1 share its preferences and act as one self
    that lives at intensity lambda_pN."""
    lam_pn, taken = _terminal_intensity(d.lambda_f, d.lambda_pn, branch, "lambda_pN")
    labels = (0, 1, d.E) if d.E > 1 else (0, 1, 2)
    selves = solve_chain(p, (d.lambda_f, lam_pn), labels, d.delta_f, d.delta_p)
    return ThresholdSolution(AgentType.NAIVE, selves, _diagnostics(selves, p, taken))


def solve_sophisticated(
    p: ModelParams, d: DiscountSpec, branch: Branch = "auto"
) -> ThresholdSolution:
    lam_ps, taken = _terminal_intensity(d.lambda_f, d.lambda_ps, branch, "lambda_pS")
    E = d.E
    lams = (d.lambda_f,) * (E - 1) + (lam_ps,)
    selves = solve_chain(p, lams, tuple(range(E + 1)), d.delta_f, d.delta_p)
    return ThresholdSolution(AgentType.SOPHISTICATED, selves, _diagnostics(selves, p, taken))


def solve(agent: AgentType | str, p: ModelParams, d: DiscountSpec | None = None) -> ThresholdSolution:
    agent = AgentType(agent)
    if agent is AgentType.CONSISTENT:
        return solve_consistent(p)
    if d is None:
        raise ValueError(f"{agent.value} agent needs a DiscountSpec")
    if agent is AgentType.CRITICAL_ONLY:
        return solve_critical_only(p, d)
    if agent is AgentType.NAIVE:
        return solve_naive(p, d)
    return solve_sophisticated(p, d)


def ode_residual(self_solution: SelfSolution, p: ModelParams, x, *, which: str = "value"):
    """Residual of the self's defining ODE at points below its threshold.

    Derivatives come from term-wise differentiation of the series, so the
    check is independent of how the coefficients were obtained.
    """
    fn = self_solution.value if which == "value" else self_solution.continuation
    lam = self_solution.intensity or 0.0
    x = np.asarray(x, dtype=float)
    d1 = fn.derivative()
    d2 = d1.derivative()
    v = fn(x)
    res = 0.5 * p.sigma**2 * x**2 * d2(x) + p.alpha * x * d1(x) - p.rho * v
    if self_solution.forcing is not None:
        res = res + lam * (self_solution.forcing(x) - v)
    return res, v
