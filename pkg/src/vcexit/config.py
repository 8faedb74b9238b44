"""Flat JSON run configuration.

A config file is a single JSON object whose keys are the camelCase names of
the model parameters, the discount structure and, optionally, a sweep::

    {"alpha": 0.02, "sigma": 0.2, "deltaF": 0.7, "deltaP": 0.3,
     "parameter": "deltaP", "values": {"start": 0, "stop": 0.7, "count": 71},
     "agentTypes": ["critical", "naive"], "outputPath": "fig6.csv"}

Missing keys take their base values. Unknown or duplicated keys are errors,
and every error message carries the line of the offending key.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .params import AGENT_ORDER, AgentType, DiscountSpec, ModelParams, ParameterError

MODEL_KEYS = {
    "alpha": "alpha",
    "sigma": "sigma",
    "rho": "rho",
    "qM": "q_m",
    "qA": "q_a",
    "qT": "q_t",
    "betaVC": "beta_vc",
    "phi": "phi",
    "d": "d",
    "cost": "cost",
}
DISCOUNT_KEYS = {
    "deltaF": "delta_f",
    "deltaP": "delta_p",
    "lambdaF": "lambda_f",
    "lambdaPN": "lambda_pn",
    "lambdaPS": "lambda_ps",
    "lambdaE": "lambda_e",
    "numSelves": "num_selves",
    "enforceOrder": "enforce_order",
}
SWEEP_KEYS = ("parameter", "values", "agentTypes", "outputPath")
SWEEPABLE = tuple(k for k in (*MODEL_KEYS, *DISCOUNT_KEYS) if k != "enforceOrder")
_SNAKE_TO_KEY = {v: k for k, v in {**MODEL_KEYS, **DISCOUNT_KEYS}.items()}


class ConfigError(ValueError):
    """Invalid config; ``line`` is 1-based, or None when not attributable."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.message = message
        self.line = line
        self.source = source
        super().__init__(str(self))

    def __str__(self) -> str:
        where = self.source or "<config>"
        if self.line is not None:
            where = f"{where}:{self.line}"
        return f"{where}: {self.message}"


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple[float, ...]
    agents: tuple[AgentType, ...] = AGENT_ORDER
    output_path: str | None = None

    def __post_init__(self) -> None:
        if self.parameter not in SWEEPABLE:
            raise ValueError(f"cannot sweep {self.parameter!r}; choose one of {', '.join(SWEEPABLE)}")
        if not self.values:
            raise ValueError("sweep needs at least one value")
        object.__setattr__(self, "values", tuple(sorted(float(v) for v in self.values)))
        object.__setattr__(self, "agents", order_agents(self.agents))


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams = ModelParams()
    discount: DiscountSpec = DiscountSpec()
    sweep: SweepSpec | None = None


def order_agents(agents) -> tuple[AgentType, ...]:
    """Parse agent names and return them, de-duplicated, in declaration order."""
    if isinstance(agents, str):
        agents = [a for a in agents.split(",") if a.strip()]
    chosen = set()
    for a in agents:
        try:
            chosen.add(AgentType(a.strip() if isinstance(a, str) else a))
        except ValueError:
            names = ", ".join(t.value for t in AGENT_ORDER)
            raise ValueError(f"unknown agent type {a!r}; expected one of {names}") from None
    if not chosen:
        raise ValueError("no agent types selected")
    return tuple(a for a in AGENT_ORDER if a in chosen)


def linear_values(start: float, stop: float, count: int) -> tuple[float, ...]:
    if isinstance(count, bool) or int(count) != count or count < 1:
        raise ValueError(f"count must be a positive integer, got {count!r}")
    if not (math.isfinite(start) and math.isfinite(stop)):
        raise ValueError("sweep bounds must be finite")
    return tuple(float(v) for v in np.linspace(start, stop, int(count)))


def _key_lines(text: str) -> dict[str, list[int]]:
    lines: dict[str, list[int]] = {}
    for m in re.finditer(r'"((?:[^"\\]|\\.)*)"\s*:', text):
        lines.setdefault(m.group(1), []).append(text.count("\n", 0, m.start()) + 1)
    return lines


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def parse_config(text: str, source: str | None = None) -> RunConfig:
    """Parse and validate config text."""
    seen: list[str] = []

    def pairs(items):
        for k, _ in items:
            seen.append(k)
        return dict(items)

    try:
        doc = json.loads(text, object_pairs_hook=pairs)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg} (column {exc.colno})", exc.lineno, source) from None
    lines = _key_lines(text)

    def fail(msg, key=None, occurrence=0):
        at = lines.get(key, [1]) if key else [1]
        raise ConfigError(msg, at[min(occurrence, len(at) - 1)], source)

    if not isinstance(doc, dict):
        fail("top level must be a JSON object")
    for k in seen:
        if seen.count(k) > 1:
            fail(f"duplicate key {k!r}", k, occurrence=1)
    known = set(MODEL_KEYS) | set(DISCOUNT_KEYS) | set(SWEEP_KEYS)
    for k in doc:
        if k not in known:
            fail(f"unknown key {k!r}", k)

    def numeric(key, integer=False):
        v = doc[key]
        if not _is_number(v):
            fail(f"{key} must be a number, got {json.dumps(v)}", key)
        if integer and int(v) != v:
            fail(f"{key} must be an integer, got {v}", key)
        return int(v) if integer else float(v)

    model_kw = {MODEL_KEYS[k]: numeric(k) for k in MODEL_KEYS if k in doc}
    disc_kw = {}
    for k, name in DISCOUNT_KEYS.items():
        if k not in doc:
            continue
        if k == "enforceOrder":
            if not isinstance(doc[k], bool):
                fail("enforceOrder must be true or false", k)
            disc_kw[name] = doc[k]
        else:
            disc_kw[name] = numeric(k, integer=(k == "numSelves"))

    model = _build(ModelParams, model_kw, lines, source)
    discount = _build(DiscountSpec, disc_kw, lines, source)

    sweep = None
    present = [k for k in SWEEP_KEYS if k in doc]
    if present:
        if "parameter" not in doc or "values" not in doc:
            fail("a sweep needs both 'parameter' and 'values'", present[0])
        param = doc["parameter"]
        if param not in SWEEPABLE:
            fail(f"cannot sweep {param!r}; choose one of {', '.join(SWEEPABLE)}", "parameter")
        raw = doc["values"]
        if isinstance(raw, dict):
            extra = set(raw) - {"start", "stop", "count"}
            if extra or len(raw) != 3:
                fail("'values' object needs exactly start, stop and count", "values")
            if not all(_is_number(raw[k]) for k in raw):
                fail("start, stop and count must be numbers", "values")
            try:
                values = linear_values(raw["start"], raw["stop"], raw["count"])
            except ValueError as exc:
                fail(str(exc), "values")
        elif isinstance(raw, list):
            if not raw:
                fail("'values' is empty", "values")
            if not all(_is_number(v) for v in raw):
                fail("'values' must contain only numbers", "values")
            values = tuple(float(v) for v in raw)
        else:
            fail("'values' must be a list or a {start, stop, count} object", "values")
        agents = doc.get("agentTypes", [a.value for a in AGENT_ORDER])
        if not isinstance(agents, list) or not all(isinstance(a, str) for a in agents):
            fail("agentTypes must be a list of strings", "agentTypes")
        try:
            agents = order_agents(agents)
        except ValueError as exc:
            fail(str(exc), "agentTypes")
        out = doc.get("outputPath")
        if out is not None and not isinstance(out, str):
            fail("outputPath must be a string", "outputPath")
        sweep = SweepSpec(param, values, agents, out)
    return RunConfig(model, discount, sweep)


def _build(cls, kwargs, lines, source):
    try:
        return cls(**kwargs)
    except ParameterError as exc:
        msg = str(exc)
        hits = []
        for snake, key in _SNAKE_TO_KEY.items():
            m = re.search(rf"\b{snake}\b", msg)
            if m and key in lines:
                hits.append((m.start(), lines[key][0]))
        line = min(hits)[1] if hits else 1
        raise ConfigError(msg, line, source) from None


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", None, str(path)) from None
    return parse_config(text, str(path))


def config_to_dict(cfg: RunConfig) -> dict:
    out = {key: getattr(cfg.model, name) for key, name in MODEL_KEYS.items()}
    out.update({key: getattr(cfg.discount, name) for key, name in DISCOUNT_KEYS.items()})
    if cfg.sweep is not None:
        out["parameter"] = cfg.sweep.parameter
        out["values"] = list(cfg.sweep.values)
        out["agentTypes"] = [a.value for a in cfg.sweep.agents]
        if cfg.sweep.output_path is not None:
            out["outputPath"] = cfg.sweep.output_path
    return out


def dump_config(cfg: RunConfig, path: str | Path) -> None:
    """Write ``cfg`` so that :func:`load_config` returns an equal config.

    Floats go through ``json``'s shortest round-trip repr.
    """
    text = json.dumps(config_to_dict(cfg), indent=2) + "\n"
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def apply_parameter(model: ModelParams, discount: DiscountSpec, key: str, value: float):
    """Return ``(model, discount)`` with the camelCase field ``key`` replaced.

    Raises ParameterError when the new point is invalid.
    """
    if key in MODEL_KEYS:
        return model.replace(**{MODEL_KEYS[key]: float(value)}), discount
    if key == "numSelves":
        if float(value) != int(value):
            raise ParameterError(f"numSelves must be an integer, got {value!r}")
        value = int(value)
    elif key in DISCOUNT_KEYS and key != "enforceOrder":
        value = float(value)
    else:
        raise ValueError(f"cannot sweep {key!r}")
    return model, discount.replace(**{DISCOUNT_KEYS[key]: value})

