"""Firm values, Nash-bargained merger price and the VC's exit payoff.

All functions accept a scalar shock level or a numpy array of them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import ModelParams


@dataclass(frozen=True)
class FirmValues:
    v_a: np.ndarray | float  # acquirer stand-alone value
    v_m: np.ndarray | float  # merged firm value
    v_t_vc: np.ndarray | float  # value of the VC's stake in the target

    @property
    def synergy(self):
        return self.v_m - self.v_a - self.v_t_vc


@dataclass(frozen=True)
class DealOutcome:
    price: np.ndarray | float
    vc_payoff: np.ndarray | float
    synergy_share: np.ndarray | float
    priority_gain: float
    stake_value: np.ndarray | float


def _annuity(p: ModelParams) -> float:
    return 1.0 / (p.rho - p.alpha)


def firm_values(p: ModelParams, x) -> FirmValues:
    k = _annuity(p)
    return FirmValues(
        v_a=p.q_a * x * k,
        v_m=p.q_m * x * k,
        v_t_vc=p.phi * p.q_t * x * k,
    )


def synergy_value(p: ModelParams, x):
    """Delta V(x): present value of the synergy profit."""
    return p.synergy * x * _annuity(p)


def nash_price(p: ModelParams, x):
    """Merger price solving the generalized Nash bargaining problem."""
    k = _annuity(p)
    return (
        p.q_t * x * k
        - (1.0 - p.beta_vc) * (1.0 - p.phi) / p.phi * p.d
        + p.beta_vc * synergy_value(p, x)
    )


def vc_payoff_from_price(p: ModelParams, price):
    """Participating preferred payout: priority income d plus phi of the rest."""
    return p.d + p.phi * (price - p.d)


def vc_exit_payoff(p: ModelParams, x):
    """Exit earning of the VC, gross of the exit cost C."""
    return (
        p.phi * p.q_t * x * _annuity(p)
        + p.beta_vc * (1.0 - p.phi) * p.d
        + p.phi * p.beta_vc * synergy_value(p, x)
    )


def net_exit_payoff(p: ModelParams, x):
    """Exit earning net of C, i.e. ``eta*x - theta``."""
    return vc_exit_payoff(p, x) - p.cost


def deal_outcome(p: ModelParams, x) -> DealOutcome:
    return DealOutcome(
        price=nash_price(p, x),
        vc_payoff=vc_exit_payoff(p, x),
        synergy_share=p.phi * p.beta_vc * synergy_value(p, x),
        priority_gain=p.beta_vc * (1.0 - p.phi) * p.d,
        stake_value=firm_values(p, x).v_t_vc,
    )


def surpluses(p: ModelParams, x, price):
    """Bargaining surpluses ``(vc_gain, acquirer_gain)`` at a given price."""
    fv = firm_values(p, x)
    vc_gain = vc_payoff_from_price(p, price) - fv.v_t_vc
    acquirer_gain = fv.v_m - price - fv.v_a
    return vc_gain, acquirer_gain


def nash_product(p: ModelParams, x, price):
    """Generalized Nash product; ``-inf`` where either surplus is negative."""
    vc_gain, acq_gain = surpluses(p, x, np.asarray(price, dtype=float))
    vc_gain = np.asarray(vc_gain, dtype=float)
    acq_gain = np.asarray(acq_gain, dtype=float)
    ok = (vc_gain >= 0) & (acq_gain >= 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.power(np.where(ok, vc_gain, 0.0), p.beta_vc) * np.power(
            np.where(ok, acq_gain, 0.0), 1.0 - p.beta_vc
        )
    out = np.where(ok, val, -np.inf)
    return out if out.ndim else float(out)
