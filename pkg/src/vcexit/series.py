"""Power-log series and their piecewise assembly.

Every value function in the model is, on each interval between
breakpoints, a finite sum of ``c * x**b * log(x)**k`` terms. Applying the
generator ``L_lam V = 0.5 s^2 x^2 V'' + a x V' - (rho + lam) V`` to a group
``x**b * q(log x)`` gives ``x**b * (Q(b) q + Q'(b) q' + 0.5 s^2 q'')`` with
``Q`` the characteristic polynomial, so forced solutions can be obtained
group by group with a triangular solve in the log power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import ModelParams, beta_negative_root, beta_root, characteristic

_RESONANCE_RTOL = 1e-12
# Forcing exponents this close to a root are re-expanded around the root:
# the direct solution carries a 1/Q(b) factor that later selves cancel
# against each other, losing every digit in long chains.
NEAR_RESONANCE = 0.02
# |log x| up to which the re-expansion is exact to double precision
LOG_SPAN = 50.0


def _shift_to_root(poly: list[float], eps: float) -> list[float]:
    """Coefficients of ``q(L) * exp(eps * L)`` as a polynomial in ``L``,
    truncated where the Taylor tail drops below 1e-17 for |L| <= LOG_SPAN."""
    taylor = [1.0]
    z = abs(eps) * LOG_SPAN
    bound = 1.0
    while bound > 1e-17 * math.exp(-z) or len(taylor) < 2:
        j = len(taylor)
        taylor.append(taylor[-1] * eps / j)
        bound = bound * z / j
    out = [0.0] * (len(poly) + len(taylor) - 1)
    for m, c in enumerate(poly):
        for j, t in enumerate(taylor):
            out[m + j] += c * t
    return out


@dataclass(frozen=True)
class PowerLogSeries:
    """Sum of ``coefficient * x**exponent * log(x)**log_power`` terms.

    ``terms`` holds ``(coefficient, exponent, log_power)`` triples; equal
    ``(exponent, log_power)`` pairs are merged on construction and exact
    zeros dropped.
    """

    terms: tuple[tuple[float, float, int], ...] = ()

    def __post_init__(self) -> None:
        merged: dict[tuple[float, int], float] = {}
        for c, b, k in self.terms:
            k = int(k)
            if k < 0:
                raise ValueError("log power must be >= 0")
            key = (float(b), k)
            merged[key] = merged.get(key, 0.0) + float(c)
        clean = tuple(
            (c, b, k) for (b, k), c in sorted(merged.items(), key=lambda kv: kv[0]) if c != 0.0
        )
        object.__setattr__(self, "terms", clean)

    @classmethod
    def monomial(cls, coefficient: float, exponent: float, log_power: int = 0) -> "PowerLogSeries":
        return cls(((coefficient, exponent, log_power),))

    @classmethod
    def affine(cls, slope: float, intercept: float) -> "PowerLogSeries":
        return cls(((slope, 1.0, 0), (intercept, 0.0, 0)))

    @classmethod
    def from_groups(cls, groups: dict[float, list[float]]) -> "PowerLogSeries":
        return cls(tuple((c, b, k) for b, poly in groups.items() for k, c in enumerate(poly)))

    def groups(self) -> dict[float, list[float]]:
        """Exponent -> coefficient list indexed by log power."""
        out: dict[float, list[float]] = {}
        for c, b, k in self.terms:
            poly = out.setdefault(b, [])
            if len(poly) <= k:
                poly.extend([0.0] * (k + 1 - len(poly)))
            poly[k] += c
        return out

    def coefficient(self, exponent: float, log_power: int = 0) -> float:
        for c, b, k in self.terms:
            if b == exponent and k == log_power:
                return c
        return 0.0

    @property
    def exponents(self) -> tuple[float, ...]:
        return tuple(sorted({b for _, b, _ in self.terms}))

    @property
    def max_log_power(self) -> int:
        return max((k for _, _, k in self.terms), default=0)

    def max_abs_coefficient(self) -> float:
        return max((abs(c) for c, _, _ in self.terms), default=0.0)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        if not self.terms:
            return out if out.ndim else float(out)
        logx = np.log(x)
        for c, b, k in self.terms:
            term = c * np.power(x, b)
            if k:
                term = term * logx**k
            out = out + term
        return out if out.ndim else float(out)

    def derivative(self) -> "PowerLogSeries":
        new = []
        for c, b, k in self.terms:
            if b != 0.0:
                new.append((c * b, b - 1.0, k))
            if k:
                new.append((c * k, b - 1.0, k - 1))
        return PowerLogSeries(tuple(new))

    def __add__(self, other: "PowerLogSeries") -> "PowerLogSeries":
        if not isinstance(other, PowerLogSeries):
            return NotImplemented
        return PowerLogSeries(self.terms + other.terms)

    def __neg__(self) -> "PowerLogSeries":
        return self * -1.0

    def __sub__(self, other: "PowerLogSeries") -> "PowerLogSeries":
        return self + (-other)

    def __mul__(self, scale: float) -> "PowerLogSeries":
        return PowerLogSeries(tuple((c * scale, b, k) for c, b, k in self.terms))

    __rmul__ = __mul__


def particular_solution(forcing: PowerLogSeries, lam: float, p: ModelParams) -> PowerLogSeries:
    """Solve ``L_lam P = -lam * forcing`` within the power-log family.

    When a forcing exponent coincides with a homogeneous root for ``lam`` the
    solution gains one log power; its constant-in-log coefficient is left at
    zero because it belongs to the homogeneous part. Exponents within
    ``NEAR_RESONANCE`` of a root are first rewritten around the root (see
    ``_shift_to_root``) and then handled the same way.
    """
    roots = (beta_root(p, lam), beta_negative_root(p, lam))
    half_s2 = 0.5 * p.sigma**2
    groups: dict[float, list[float]] = {}
    for b, poly in forcing.groups().items():
        resonant = next((r for r in roots if math.isclose(b, r, rel_tol=_RESONANCE_RTOL)), None)
        if resonant is None:
            near = next((r for r in roots if abs(b - r) <= NEAR_RESONANCE), None)
            if near is not None:
                poly = _shift_to_root(poly, b - near)
                resonant = near
        m = len(poly) - 1
        lin = p.alpha + half_s2 * (2.0 * b - 1.0)
        if resonant is not None:
            b = resonant
            lin = p.alpha + half_s2 * (2.0 * b - 1.0)
            q = [0.0] * (m + 3)
            # lin*(k+1)*q[k+1] + half_s2*(k+2)*(k+1)*q[k+2] = -lam*poly[k]
            for k in range(m, -1, -1):
                q[k + 1] = (-lam * poly[k] - half_s2 * (k + 2) * (k + 1) * q[k + 2]) / (lin * (k + 1))
            q = q[: m + 2]
        else:
            lead = characteristic(p, b, lam)
            q = [0.0] * (m + 3)
            for k in range(m, -1, -1):
                q[k] = (
                    -lam * poly[k]
                    - lin * (k + 1) * q[k + 1]
                    - half_s2 * (k + 2) * (k + 1) * q[k + 2]
                ) / lead
            q = q[: m + 1]
        acc = groups.setdefault(b, [])
        if len(acc) < len(q):
            acc.extend([0.0] * (len(q) - len(acc)))
        for k, c in enumerate(q):
            acc[k] += c
    return PowerLogSeries.from_groups(groups)


@dataclass(frozen=True)
class PiecewiseSeries:
    """Function on (0, inf) given by one power-log series per interval.

    ``pieces[i]`` applies on ``(breaks[i-1], breaks[i]]`` with the outer
    intervals open-ended; a point on a breakpoint takes the left piece.
    """

    breaks: tuple[float, ...]
    pieces: tuple[PowerLogSeries, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "breaks", tuple(float(b) for b in self.breaks))
        object.__setattr__(self, "pieces", tuple(self.pieces))
        if len(self.pieces) != len(self.breaks) + 1:
            raise ValueError("need exactly one more piece than breakpoints")
        if any(b1 >= b2 for b1, b2 in zip(self.breaks, self.breaks[1:])):
            raise ValueError("breakpoints must be strictly increasing")

    @classmethod
    def single(cls, series: PowerLogSeries) -> "PiecewiseSeries":
        return cls((), (series,))

    def piece_index(self, x):
        return np.searchsorted(np.asarray(self.breaks), x, side="left")

    def piece_at(self, x: float) -> PowerLogSeries:
        return self.pieces[int(self.piece_index(float(x)))]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if not self.breaks:
            return self.pieces[0](x)
        idx = self.piece_index(x)
        out = np.zeros_like(x)
        for i, piece in enumerate(self.pieces):
            mask = idx == i
            if np.any(mask):
                out = np.where(mask, piece(np.where(mask, x, 1.0)), out)
        return out if out.ndim else float(out)

    def derivative(self) -> "PiecewiseSeries":
        return PiecewiseSeries(self.breaks, tuple(pc.derivative() for pc in self.pieces))

    def truncate(self, at: float, above: PowerLogSeries) -> "PiecewiseSeries":
        """Keep the pieces below ``at`` and use ``above`` from there on."""
        kept = tuple(b for b in self.breaks if b < at)
        return PiecewiseSeries(kept + (at,), self.pieces[: len(kept) + 1] + (above,))

    def add_to_pieces(self, extra: PowerLogSeries, upto: int | None = None) -> "PiecewiseSeries":
        n = len(self.pieces) if upto is None else upto
        return PiecewiseSeries(
            self.breaks,
            tuple(pc + extra if i < n else pc for i, pc in enumerate(self.pieces)),
        )

    def max_abs_coefficient(self) -> float:
        return max(pc.max_abs_coefficient() for pc in self.pieces)


def forced_solution(forcing: PiecewiseSeries, lam: float, p: ModelParams) -> PiecewiseSeries:
    """C1 solution of ``L_lam W = -lam * forcing`` that stays bounded at 0.

    On the lowest interval this is the plain particular solution. At every
    breakpoint the jump between neighbouring particular solutions is
    cancelled with both homogeneous solutions so that ``W`` and ``W'`` are
    continuous; the homogeneous part regular at zero is left free.
    """
    bp = beta_root(p, lam)
    bn = beta_negative_root(p, lam)
    parts = [particular_solution(pc, lam, p) for pc in forcing.pieces]
    pieces = [parts[0]]
    correction = PowerLogSeries()
    for i, c in enumerate(forcing.breaks):
        base = parts[i + 1] + correction
        prev = pieces[-1]
        jump = base(c) - prev(c)
        jump_slope = base.derivative()(c) - prev.derivative()(c)
        a = (c * jump_slope - bn * jump) / (c**bp * (bn - bp))
        b = (c * jump_slope - bp * jump) / (c**bn * (bp - bn))
        correction = correction + PowerLogSeries(((a, bp, 0), (b, bn, 0)))
        pieces.append(parts[i + 1] + correction)
    return PiecewiseSeries(forcing.breaks, tuple(pieces))
