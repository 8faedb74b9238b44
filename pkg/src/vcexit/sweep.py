"""Parameter sweeps and their CSV form.

Rows are produced in a fixed order (values ascending, agents in declaration
order, selves from 0 to E) so the output is byte-for-byte reproducible.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

from .config import apply_parameter
from .params import AgentType, DiscountSpec, ModelParams, ParameterError
from .solvers import SolverError, ThresholdSolution, solve

HEADER = ("param", "value", "agent", "selfIndex", "threshold", "residual")


def fmt(x: float) -> str:
    return format(float(x), ".10g")


@dataclass(frozen=True)
class SweepRow:
    param: str
    value: float
    agent: AgentType
    self_index: str
    threshold: float | None
    residual: float | str  # diagnostic text when the solve failed

    def cells(self) -> tuple[str, ...]:
        th = "" if self.threshold is None else fmt(self.threshold)
        res = self.residual if isinstance(self.residual, str) else fmt(self.residual)
        return (self.param, fmt(self.value), self.agent.value, self.self_index, th, res)


@dataclass(frozen=True)
class SkippedPoint:
    param: str
    value: float
    reason: str


def solution_rows(param: str, value: float, sol: ThresholdSolution) -> list[SweepRow]:
    """One row per self; the residual is the worst of the self's fixed-point,
    value-matching and smooth-pasting residuals."""
    diag = sol.diagnostics
    rows = []
    for k, s in enumerate(sol.selves):
        worst = max(abs(s.residual), diag["value_matching"][k], diag["smooth_pasting"][k])
        rows.append(SweepRow(param, value, sol.agent_type, str(s.index), s.threshold, worst))
    return rows


def run_sweep(
    model: ModelParams,
    discount: DiscountSpec,
    parameter: str,
    values: Iterable[float],
    agents: Iterable[AgentType],
    *,
    label: str | None = None,
    on_skip: Callable[[SkippedPoint], None] | None = None,
) -> tuple[list[SweepRow], list[SkippedPoint]]:
    """Solve every agent at every value of ``parameter``.

    Points that violate a parameter invariant are skipped and returned
    (and passed to ``on_skip``); solver failures yield a row with no
    threshold and the error text in the residual column.
    """
    label = label or parameter
    rows: list[SweepRow] = []
    skipped: list[SkippedPoint] = []
    for value in sorted(float(v) for v in values):
        try:
            p, d = apply_parameter(model, discount, parameter, value)
        except ParameterError as exc:
            point = SkippedPoint(label, value, str(exc))
            skipped.append(point)
            if on_skip:
                on_skip(point)
            continue
        for agent in agents:
            try:
                sol = solve(agent, p, d)
            except SolverError as exc:
                rows.append(SweepRow(label, value, AgentType(agent), "", None, f"{type(exc).__name__}: {exc}"))
                continue
            rows.extend(solution_rows(label, value, sol))
    return rows, skipped


def write_csv(rows: Iterable[SweepRow], target: str | Path | io.TextIOBase) -> None:
    """Write rows with the fixed header, UTF-8 and LF line endings."""
    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8", newline="") as fh:
            write_csv(rows, fh)
        return
    w = csv.writer(target, lineterminator="\n")
    w.writerow(HEADER)
    for r in rows:
        w.writerow(r.cells())


def read_csv(path: str | Path) -> list[dict[str, str]]:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))
