"""Model primitives: economic parameters, discounting structure and
characteristic exponents.

The exit payoff of the venture capitalist is affine in the profit shock,
``eta * x - theta``; every solver and the Monte Carlo oracle works with
these two derived numbers plus the roots of

    0.5 * sigma**2 * b * (b - 1) + alpha * b - (rho + lam) = 0

for the arrival intensities that appear in the self structure.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, fields


class ParameterError(ValueError):
    """A parameter set violates one of the model's invariants."""


class AgentType(str, enum.Enum):
    CONSISTENT = "consistent"
    CRITICAL_ONLY = "critical"
    NAIVE = "naive"
    SOPHISTICATED = "sophisticated"


AGENT_ORDER = (
    AgentType.CONSISTENT,
    AgentType.CRITICAL_ONLY,
    AgentType.NAIVE,
    AgentType.SOPHISTICATED,
)


def _finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise ParameterError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class ModelParams:
    """Economic primitives of the trade-sale exit problem.

    Defaults are the base parameter set used for the numerical results
    (alpha=0.02, sigma=0.2, rho=0.06, Q^M=1.7, Q^A=1, Q^T=0.5,
    beta_VC=0.2, phi=0.4, d=0.4, C=10).

    Parameters
    ----------
    alpha : float
        Drift of the profit shock X (per unit time).
    sigma : float
        Volatility of X.
    rho : float
        Discount rate; must exceed ``alpha``.
    q_m, q_a, q_t : float
        Deterministic profit components of the merged, acquiring and target
        firms. ``q_m > q_a + q_t`` (positive synergy).
    beta_vc : float
        Bargaining power of the VC in [0, 1].
    phi : float
        VC equity ratio in (0, 1].
    d : float
        Fixed priority income of the participating preferred stock.
    cost : float
        Exit cost C.
    """

    alpha: float = 0.02
    sigma: float = 0.2
    rho: float = 0.06
    q_m: float = 1.7
    q_a: float = 1.0
    q_t: float = 0.5
    beta_vc: float = 0.2
    phi: float = 0.4
    d: float = 0.4
    cost: float = 10.0

    def __post_init__(self) -> None:
        for f in fields(self):
            _finite(f.name, getattr(self, f.name))
        if self.sigma <= 0:
            raise ParameterError("sigma > 0 violated")
        if self.rho <= 0:
            raise ParameterError("rho > 0 violated")
        if not self.rho > self.alpha:
            raise ParameterError(
                f"rho > alpha violated (rho={self.rho}, alpha={self.alpha}); "
                "firm values diverge"
            )
        if not 0 < self.phi <= 1:
            raise ParameterError(f"phi in (0, 1] violated (phi={self.phi})")
        if not 0 <= self.beta_vc <= 1:
            raise ParameterError(f"beta_vc in [0, 1] violated (beta_vc={self.beta_vc})")
        if self.d < 0:
            raise ParameterError(f"d >= 0 violated (d={self.d})")
        if self.cost < 0:
            raise ParameterError(f"cost >= 0 violated (cost={self.cost})")
        if min(self.q_a, self.q_t) < 0:
            raise ParameterError("q_a >= 0 and q_t >= 0 violated")
        if not self.q_m > self.q_a + self.q_t:
            raise ParameterError(
                f"q_m > q_a + q_t violated ({self.q_m} <= {self.q_a + self.q_t}); "
                "synergy must be positive"
            )
        if not self.theta > 0:
            raise ParameterError(
                f"theta = cost - beta_vc*d*(1-phi) > 0 violated (theta={self.theta}); "
                "no interior exit threshold"
            )

    @property
    def synergy(self) -> float:
        return self.q_m - self.q_a - self.q_t

    @property
    def eta(self) -> float:
        """Slope of the net exit payoff in x."""
        return self.phi * (self.q_t + self.beta_vc * self.synergy) / (self.rho - self.alpha)

    @property
    def theta(self) -> float:
        """Net exit cost: C less the priority gain."""
        return self.cost - self.beta_vc * self.d * (1.0 - self.phi)

    def beta(self, lam: float = 0.0) -> float:
        return beta_root(self, lam)

    def replace(self, **changes) -> "ModelParams":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return ModelParams(**values)


def derive_eta_theta(p: ModelParams) -> tuple[float, float]:
    """Return ``(eta, theta)`` so that the net exit payoff is ``eta*x - theta``."""
    return p.eta, p.theta


def _quadratic_parts(p: ModelParams, lam: float) -> tuple[float, float]:
    if lam < 0 or not math.isfinite(lam):
        raise ParameterError(f"intensity must be finite and >= 0, got {lam!r}")
    s2 = p.sigma * p.sigma
    k = p.alpha / s2 - 0.5
    return k, math.sqrt(k * k + 2.0 * (p.rho + lam) / s2)


def beta_root(p: ModelParams, lam: float = 0.0) -> float:
    """Positive root of ``0.5 s^2 b(b-1) + a b - (rho + lam) = 0``.

    It exceeds one because rho > alpha, and grows strictly with ``lam``.
    """
    k, r = _quadratic_parts(p, lam)
    return r - k


def beta_negative_root(p: ModelParams, lam: float = 0.0) -> float:
    """Negative root of the same quadratic (needed between breakpoints)."""
    k, r = _quadratic_parts(p, lam)
    return -k - r


def characteristic(p: ModelParams, b: float, lam: float = 0.0) -> float:
    """Value of the characteristic polynomial at exponent ``b``."""
    return 0.5 * p.sigma**2 * b * (b - 1.0) + p.alpha * b - (p.rho + lam)


@dataclass(frozen=True)
class DiscountSpec:
    """Quasi-hyperbolic discount structure and self arrival intensities.

    ``delta_f`` multiplies payoffs received after the current self dies but
    before the fund expires; ``delta_p`` multiplies payoffs received after the
    fund expiry (arrival of the terminal self E).

    ``num_selves`` is E + 1. Set ``enforce_order=False`` to accept
    ``delta_f < delta_p`` (needed to reproduce a parameter choice printed with
    that ordering).
    """

    delta_f: float = 0.7
    delta_p: float = 0.3
    lambda_f: float = 1.0
    lambda_pn: float = 1.0
    lambda_ps: float = 1.0
    lambda_e: float = 1.0
    num_selves: int = 4
    enforce_order: bool = field(default=True, compare=False)

    def __post_init__(self) -> None:
        for name in ("delta_f", "delta_p", "lambda_f", "lambda_pn", "lambda_ps", "lambda_e"):
            _finite(name, getattr(self, name))
        if not 0 < self.delta_f <= 1:
            raise ParameterError(f"delta_f in (0, 1] violated (delta_f={self.delta_f})")
        if not 0 <= self.delta_p <= 1:
            raise ParameterError(f"delta_p in [0, 1] violated (delta_p={self.delta_p})")
        if self.enforce_order and self.delta_f < self.delta_p:
            raise ParameterError(
                f"delta_f >= delta_p violated (delta_f={self.delta_f}, delta_p={self.delta_p})"
            )
        for name in ("lambda_f", "lambda_pn", "lambda_ps", "lambda_e"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} > 0 violated ({name}={getattr(self, name)})")
        if isinstance(self.num_selves, bool) or int(self.num_selves) != self.num_selves:
            raise ParameterError(f"num_selves must be an integer, got {self.num_selves!r}")
        object.__setattr__(self, "num_selves", int(self.num_selves))
        if self.num_selves < 2:
            raise ParameterError(f"num_selves >= 2 violated (num_selves={self.num_selves})")

    @property
    def E(self) -> int:
        """Index of the terminal self."""
        return self.num_selves - 1

    @classmethod
    def coupled(
        cls,
        delta_f: float,
        delta_p: float,
        lambda_f: float,
        num_selves: int,
        *,
        enforce_order: bool = True,
    ) -> "DiscountSpec":
        """Intensities tied to the self count.

        lambda_pS = lambda_f, lambda_pN = lambda_f / E and the fund expiry
        intensity matches the expected sophisticated horizon,
        ``1/lambda_E = (E - 1)/lambda_f + 1/lambda_pS = E/lambda_f``.
        """
        E = num_selves - 1
        return cls(
            delta_f=delta_f,
            delta_p=delta_p,
            lambda_f=lambda_f,
            lambda_pn=lambda_f / E,
            lambda_ps=lambda_f,
            lambda_e=lambda_f / E,
            num_selves=num_selves,
            enforce_order=enforce_order,
        )

    def replace(self, **changes) -> "DiscountSpec":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return DiscountSpec(**values)

    def stages(self, agent: AgentType | str) -> tuple[tuple[float, ...], tuple[float, ...]]:
        """Self structure seen by self 0.

        Returns ``(intensities, discounts)``: the death intensity of every
        non-terminal self in order, and the factor self 0 applies to a payoff
        collected while each self (terminal one included) is in charge.
        """
        agent = AgentType(agent)
        if agent is AgentType.CONSISTENT:
            return (), (1.0,)
        if agent is AgentType.CRITICAL_ONLY:
            return (self.lambda_e,), (1.0, self.delta_p)
        if agent is AgentType.NAIVE:
            return (self.lambda_f, self.lambda_pn), (1.0, self.delta_f, self.delta_p)
        E = self.E
        lams = (self.lambda_f,) * (E - 1) + (self.lambda_ps,)
        discounts = (1.0,) + (self.delta_f,) * (E - 1) + (self.delta_p,)
        return lams, discounts


@dataclass(frozen=True)
class BetaExponents:
    """Positive characteristic roots for intensities 0, lambda_E, lambda_pN,
    lambda_f and lambda_pS."""

    beta1: float
    beta2: float
    beta3: float
    beta4: float
    beta5: float


def beta_exponents(p: ModelParams, d: DiscountSpec) -> BetaExponents:
    return BetaExponents(
        beta1=beta_root(p, 0.0),
        beta2=beta_root(p, d.lambda_e),
        beta3=beta_root(p, d.lambda_pn),
        beta4=beta_root(p, d.lambda_f),
        beta5=beta_root(p, d.lambda_ps),
    )


BASE_PARAMS = ModelParams()
