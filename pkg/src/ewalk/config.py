"""Flat ``key = value`` experiment configs.

One assignment per line; ``#`` starts a comment; blank lines are ignored.
Numbers may be written as plain literals or as simple arithmetic in ``pi``
(``theta = pi/4``).  ``auto`` selects a size derived from the other
parameters.  ``experiment`` and ``m`` are required; everything else has a
default.
"""

from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass
from typing import Any, Callable

__all__ = ["ConfigError", "ExperimentConfig", "EXPERIMENTS", "parse_config", "serialize_config"]

AUTO = None


class ConfigError(ValueError):
    def __init__(self, message: str, key: str | None = None, line: int | None = None, column: int | None = None):
        self.key, self.line, self.column = key, line, column
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}


def _eval_number(text: str) -> float:
    def ev(node):
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        raise ValueError(text)

    try:
        return float(text)
    except ValueError:
        pass
    try:
        return ev(ast.parse(text, mode="eval").body)
    except (SyntaxError, ValueError, ZeroDivisionError):
        raise ValueError(f"not a number: {text!r}") from None


@dataclass(frozen=True)
class Param:
    kind: str  # "float", "int", "bool"
    default: Any
    check: Callable[[Any], bool] | None = None
    constraint: str = ""
    allow_auto: bool = False


def _positive(x):
    return x > 0


def _theta_ok(x):
    return 0 <= x <= math.pi


M = Param("float", AUTO, _positive, "must be > 0")
THETA = Param("float", math.pi / 4, _theta_ok, "must lie in [0, pi]")
PHI = Param("float", 0.0)
N_SITES = Param("int", 1000, lambda x: x >= 3, "must be >= 3")


def _steps(default):
    return Param("int", default, lambda x: x >= 0, "must be >= 0", allow_auto=default is AUTO)


def _points(default):
    return Param("int", default, lambda x: x >= 1, "must be >= 1")


EXPERIMENTS: dict[str, dict[str, Param]] = {
    "bloch": {
        "m": M, "theta": THETA, "n_sites": N_SITES, "steps": _steps(1000),
        "density_stride": Param("int", 0, lambda x: x >= 0, "must be >= 0 (0 disables)"),
    },
    "sbo": {
        "m": M, "detuning": Param("float", 0.01, _positive, "must be > 0"), "theta": THETA,
        "n_sites": N_SITES, "steps": _steps(40_000), "phi": PHI,
    },
    "resonant_drift": {
        "m": M, "theta": THETA, "phi": PHI, "n_sites": Param("int", 2000, lambda x: x >= 3, "must be >= 3"),
        "steps": _steps(AUTO), "relative_amplitude": Param("float", 1.0),
    },
    "velocity_curve": {
        "m": M, "theta": THETA, "phi_points": _points(64),
        "n_sites": Param("int", 2000, lambda x: x >= 3, "must be >= 3"), "steps": _steps(AUTO),
        "relative_amplitude": Param("float", 1.0), "fit_offset": Param("bool", False),
    },
    "velocity_map": {
        "m": M, "theta_points": _points(48), "phi_points": _points(64),
        "n_sites": Param("int", AUTO, lambda x: x >= 3, "must be >= 3", allow_auto=True), "steps": _steps(AUTO),
    },
    "crossover_scan": {
        "m": M, "theta": THETA, "n_sites": Param("int", 2500, lambda x: x >= 3, "must be >= 3"),
        "steps": _steps(AUTO), "min_steps": Param("int", 10_000, _positive, "must be > 0"),
        "grid_points": _points(30), "grid_denominator": Param("int", 40, lambda x: x >= 2, "must be >= 2"),
    },
    "density": {
        "m": M, "theta": THETA, "n_sites": N_SITES, "steps": _steps(1000),
        "detuning": Param("float", 0.01, _positive, "must be > 0"), "phi": PHI,
        "stride": Param("int", 1, lambda x: x >= 1, "must be >= 1"),
    },
}

REQUIRED = ("experiment", "m")


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment name plus every parameter, defaults filled in.

    ``None`` in ``params`` means ``auto``.
    """

    experiment: str
    params: dict

    def __getitem__(self, key):
        return self.params[key]


def _coerce(key: str, raw: str, spec: Param, line: int, column: int):
    if raw == "auto":
        if not spec.allow_auto:
            raise ConfigError(f"{key!r} does not accept 'auto'", key, line, column)
        return AUTO
    try:
        if spec.kind == "bool":
            low = raw.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            value = low in ("true", "1", "yes")
        else:
            value = _eval_number(raw)
            if not math.isfinite(value):
                raise ValueError(raw)
            if spec.kind == "int":
                if value != int(value):
                    raise ValueError(raw)
                value = int(value)
    except (ValueError, OverflowError):
        raise ConfigError(f"{key!r}: cannot read {raw!r} as {spec.kind}", key, line, column) from None
    if spec.check is not None and not spec.check(value):
        raise ConfigError(f"{key!r} {spec.constraint} (got {raw})", key, line, column)
    return value


def parse_config(text: str) -> ExperimentConfig:
    entries: dict[str, tuple[str, int, int]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0]
        if not body.strip():
            continue
        if "=" not in body:
            col = len(body) - len(body.lstrip()) + 1
            raise ConfigError("expected 'key = value'", None, lineno, col)
        key_part, value_part = body.split("=", 1)
        key = key_part.strip()
        if not key or not key.replace("_", "").isalnum():
            raise ConfigError(f"invalid key {key!r}", None, lineno, len(key_part) - len(key_part.lstrip()) + 1)
        if key in entries:
            raise ConfigError(f"duplicate key {key!r}", key, lineno, 1)
        value = value_part.strip().strip('"').strip("'")
        column = len(key_part) + 2 + (len(value_part) - len(value_part.lstrip()))
        entries[key] = (value, lineno, column)

    if "experiment" not in entries:
        raise ConfigError("missing required key 'experiment'", "experiment")
    name, line, col = entries.pop("experiment")
    if name not in EXPERIMENTS:
        raise ConfigError(
            f"unknown experiment {name!r}; choose from {', '.join(EXPERIMENTS)}", "experiment", line, col
        )
    for key in REQUIRED[1:]:
        if key not in entries:
            raise ConfigError(f"missing required key {key!r}", key)
    schema = EXPERIMENTS[name]
    for key, (_, line, col) in entries.items():
        if key not in schema:
            raise ConfigError(f"unknown key {key!r} for experiment {name!r}", key, line, col)

    params = {}
    for key, spec in schema.items():
        if key in entries:
            raw, line, col = entries[key]
            params[key] = _coerce(key, raw, spec, line, col)
        else:
            params[key] = spec.default
    return ExperimentConfig(name, params)


def _format(value) -> str:
    if value is AUTO:
        return "auto"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def serialize_config(config: ExperimentConfig) -> str:
    lines = [f"experiment = {config.experiment}"]
    lines += [f"{k} = {_format(v)}" for k, v in config.params.items()]
    return "\n".join(lines) + "\n"
