"""Figure presets: the parameter sweeps behind figures 5 to 11.

Each preset is a list of panels. A panel fixes a discount structure, sweeps
one parameter and names the agents it compares. When several panels sweep
the same parameter the CSV ``param`` column carries the panel setting, e.g.
``deltaP[lambdaPN=0.8]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .config import linear_values
from .params import AGENT_ORDER, AgentType, DiscountSpec, ModelParams
from .sweep import SkippedPoint, SweepRow, run_sweep

C, G, N, S = AGENT_ORDER

# fund-expiry intensity implied by a naive horizon of one lambda_f self
# followed by one lambda_pN self: 1/lambda_E = 1/lambda_f + 1/lambda_pN
def _expiry_intensity(lambda_f: float, lambda_pn: float) -> float:
    return 1.0 / (1.0 / lambda_f + 1.0 / lambda_pn)


@dataclass(frozen=True)
class Panel:
    label: str
    parameter: str
    values: tuple[float, ...]
    discount: DiscountSpec
    agents: tuple[AgentType, ...]
    model: ModelParams = field(default_factory=ModelParams)


def fig5() -> list[Panel]:
    """x* and x_G against delta_p (lambda_E = 1) and against lambda_E
    (delta_p = 0.3)."""
    base = DiscountSpec(delta_f=1.0, lambda_e=1.0)
    return [
        Panel("deltaP", "deltaP", linear_values(0.0, 1.0, 51), base.replace(delta_p=0.3), (C, G)),
        Panel("lambdaE", "lambdaE", linear_values(0.02, 1.0, 50), base.replace(delta_p=0.3), (C, G)),
    ]


def _naive_panel(lambda_pn: float, label: str) -> Panel:
    d = DiscountSpec(
        delta_f=0.7,
        delta_p=0.3,
        lambda_f=1.0,
        lambda_pn=lambda_pn,
        lambda_e=_expiry_intensity(1.0, lambda_pn),
    )
    return Panel(label, "deltaP", linear_values(0.0, 0.7, 71), d, (C, G, N))


def fig6() -> list[Panel]:
    """x_G and x_N,0 against delta_p with lambda_f = lambda_pN = 1."""
    return [_naive_panel(1.0, "deltaP")]


FIG7_LAMBDA_PN = (0.8, 0.5, 0.2, 0.05)


def fig7() -> list[Panel]:
    """As fig6 for lambda_pN in 0.8, 0.5, 0.2, 0.05."""
    return [_naive_panel(lp, f"deltaP[lambdaPN={lp:g}]") for lp in FIG7_LAMBDA_PN]


FIG8_SELVES = (4, 5, 6)


def fig8() -> list[Panel]:
    """x_G, x_N,0 and x_S,0 against delta_p for E + 1 = 4, 5, 6 with
    lambda_f = lambda_pS = 0.5 and delta_f = 0.7."""
    return [
        Panel(
            f"deltaP[numSelves={n}]",
            "deltaP",
            linear_values(0.0, 0.7, 71),
            DiscountSpec.coupled(0.7, 0.3, 0.5, n),
            (C, G, N, S),
        )
        for n in FIG8_SELVES
    ]


def sensitivity_discount(as_printed: bool = False) -> DiscountSpec:
    """Discount structure for the comparative statics figures.

    lambda_f = lambda_pS = 4 with six selves. The default takes
    delta_f = 0.7 > delta_p = 0.5; ``as_printed`` swaps them to
    delta_f = 0.5, delta_p = 0.7, which breaks delta_f >= delta_p.
    """
    df, dp = (0.5, 0.7) if as_printed else (0.7, 0.5)
    return DiscountSpec.coupled(df, dp, 4.0, 6, enforce_order=not as_printed)


SENSITIVITY_RANGES = {
    "cost": (8.0, 14.0),
    "betaVC": (0.0, 1.0),
    "d": (0.0, 2.0),
    "phi": (0.1, 1.0),
    "alpha": (0.0, 0.05),
    "sigma": (0.1, 0.4),
}


def _sensitivity(params: tuple[str, str], as_printed: bool) -> list[Panel]:
    d = sensitivity_discount(as_printed)
    return [
        Panel(name, name, linear_values(*SENSITIVITY_RANGES[name], 21), d, AGENT_ORDER)
        for name in params
    ]


def fig9(as_printed: bool = False) -> list[Panel]:
    """Thresholds against exit cost C and bargaining power beta_VC."""
    return _sensitivity(("cost", "betaVC"), as_printed)


def fig10(as_printed: bool = False) -> list[Panel]:
    """Thresholds against priority income d and equity ratio phi."""
    return _sensitivity(("d", "phi"), as_printed)


def fig11(as_printed: bool = False) -> list[Panel]:
    """Thresholds against growth rate alpha and volatility sigma."""
    return _sensitivity(("alpha", "sigma"), as_printed)


PRESETS = {
    "fig5": fig5,
    "fig6": fig6,
    "fig7": fig7,
    "fig8": fig8,
    "fig9": fig9,
    "fig10": fig10,
    "fig11": fig11,
}
ORDER_SENSITIVE = ("fig9", "fig10", "fig11")


def preset_panels(name: str, as_printed: bool = False) -> list[Panel]:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose one of {', '.join(PRESETS)}")
    if name in ORDER_SENSITIVE:
        return PRESETS[name](as_printed)
    if as_printed:
        raise ValueError(f"{name} has no alternative ordering")
    return PRESETS[name]()


def run_preset(name: str, as_printed: bool = False, on_skip=None) -> tuple[list[SweepRow], list[SkippedPoint]]:
    rows: list[SweepRow] = []
    skipped: list[SkippedPoint] = []
    for panel in preset_panels(name, as_printed):
        r, s = run_sweep(
            panel.model, panel.discount, panel.parameter, panel.values, panel.agents,
            label=panel.label, on_skip=on_skip,
        )
        rows.extend(r)
        skipped.extend(s)
    return rows, skipped
