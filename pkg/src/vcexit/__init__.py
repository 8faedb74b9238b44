"""Optimal trade-sale exit thresholds for a venture capitalist whose
discounting is quasi-hyperbolic.

Four agent types are covered: time-consistent, aware only of the fund's
expiry date ("critical"), naive and sophisticated. Every analytic result
can be cross-checked with the Monte Carlo oracle in :mod:`vcexit.oracle`.
"""

__version__ = "0.1.0"

from .bargaining import (
    DealOutcome,
    FirmValues,
    deal_outcome,
    firm_values,
    nash_price,
    nash_product,
    net_exit_payoff,
    vc_exit_payoff,
)
from .config import ConfigError, RunConfig, SweepSpec, dump_config, load_config, parse_config
from .oracle import (
    GridSearchResult,
    McEstimate,
    SimConfig,
    grid_optimal_threshold,
    nash_product_check,
    simulate_policy_value,
)
from .params import (
    AGENT_ORDER,
    BASE_PARAMS,
    AgentType,
    BetaExponents,
    DiscountSpec,
    ModelParams,
    ParameterError,
    beta_exponents,
    beta_root,
    derive_eta_theta,
)
from .series import PiecewiseSeries, PowerLogSeries
from .solvers import (
    BranchDegeneracy,
    CoefficientBlowup,
    RootNotBracketed,
    SolverError,
    ThresholdSolution,
    eval_value,
    solve,
    solve_consistent,
    solve_critical_only,
    solve_naive,
    solve_sophisticated,
)

__all__ = [
    "AGENT_ORDER", "BASE_PARAMS", "AgentType", "BetaExponents", "BranchDegeneracy",
    "CoefficientBlowup", "ConfigError", "DealOutcome", "DiscountSpec", "FirmValues",
    "GridSearchResult", "McEstimate", "ModelParams", "ParameterError", "PiecewiseSeries",
    "PowerLogSeries", "RootNotBracketed", "RunConfig", "SimConfig", "SolverError",
    "SweepSpec", "ThresholdSolution", "beta_exponents", "beta_root", "deal_outcome",
    "derive_eta_theta", "dump_config", "eval_value", "firm_values", "grid_optimal_threshold",
    "load_config", "nash_price", "nash_product", "nash_product_check", "net_exit_payoff",
    "parse_config", "simulate_policy_value", "solve", "solve_consistent",
    "solve_critical_only", "solve_naive", "solve_sophisticated", "vc_exit_payoff",
]
