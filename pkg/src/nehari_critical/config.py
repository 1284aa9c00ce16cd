"""Experiment configuration: a sectioned ``key = value`` text format.

Grammar::

    # comment
    [section]
    key = <JSON value>

Blank lines and ``#`` comments are ignored. Every value is a JSON literal
(numbers, ``true``/``false``, ``null``, lists, strings in double quotes).
Sections and keys are fixed (see ``SCHEMA``); unknown ones are rejected with
the offending line number. Keys may appear in any order but at most once.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields

import numpy as np

from . import algebra
from .discretization import make_grid
from .errors import HypothesisError, NehariError
from .functional import ProblemSpec


class ConfigError(NehariError):
    """Base class of configuration errors (CLI exit code 1)."""


class ParseError(ConfigError, ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ValidationError(ConfigError, ValueError):
    def __init__(self, field_name: str, message: str = ""):
        super().__init__(f"{field_name}: {message}" if message else field_name)
        self.field = field_name


_REQUIRED = object()

# section -> key -> default (``_REQUIRED`` when there is none)
SCHEMA: dict[str, dict[str, object]] = {
    "domain": {"radius": 1.0},
    "grid": {"n": 1024, "graded": 0.0},
    "system": {
        "lambdas": _REQUIRED,
        "beta": _REQUIRED,
        "groups": _REQUIRED,
        "limit_system": False,
    },
    "solver": {
        "step": 1.0,
        "tol": 1e-8,
        "max_iter": 2000,
        "restarts": 20,
        "seed": 0,
        "gamma": None,
    },
    "sweep": {"eps": None, "rho": None, "mixed": True},
    "output": {"dir": "out"},
}

DEFAULT_GRADING = 4.0  # used for ``graded = true``


@dataclass(frozen=True)
class ExperimentConfig:
    radius: float
    n: int
    graded: float
    lambdas: tuple[float, ...]
    beta: tuple[tuple[float, ...], ...]
    groups: tuple[int, ...]
    limit_system: bool
    step: float
    tol: float
    max_iter: int
    restarts: int
    seed: int
    gamma: tuple[int, ...] | None
    eps: tuple[float, ...] | None
    rho: float | None
    mixed: bool
    dir: str
    # "config" or "default" for every key, keyed "section.key"
    provenance: dict = field(default_factory=dict, compare=False, repr=False)

    def to_dict(self) -> dict:
        out: dict = {}
        for section, keys in SCHEMA.items():
            out[section] = {k: _jsonable(getattr(self, k)) for k in keys}
        return out

    def to_text(self) -> str:
        lines = []
        for section, values in self.to_dict().items():
            lines.append(f"[{section}]")
            lines.extend(f"{k} = {json.dumps(v)}" for k, v in values.items())
            lines.append("")
        return "\n".join(lines)

    def with_overrides(self, **changes) -> "ExperimentConfig":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        prov = dict(self.provenance)
        for k, v in changes.items():
            values[k] = v
            prov[_section_of(k) + "." + k] = "override"
        values["provenance"] = prov
        return ExperimentConfig(**values)


def _section_of(key: str) -> str:
    for section, keys in SCHEMA.items():
        if key in keys:
            return section
    raise KeyError(key)


def _jsonable(v):
    if isinstance(v, tuple):
        return [_jsonable(x) for x in v]
    return v


def _tokenize(text: str) -> dict[tuple[str, str], tuple[object, int]]:
    raw: dict[tuple[str, str], tuple[object, int]] = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise ParseError(lineno, f"malformed section header {stripped!r}")
            section = stripped[1:-1].strip()
            if section not in SCHEMA:
                raise ParseError(lineno, f"unknown section [{section}]")
            continue
        if "=" not in stripped:
            raise ParseError(lineno, "expected 'key = value'")
        if section is None:
            raise ParseError(lineno, "key outside of any section")
        key, value = (s.strip() for s in stripped.split("=", 1))
        if key not in SCHEMA[section]:
            raise ParseError(lineno, f"unknown key {key!r} in [{section}]")
        if (section, key) in raw:
            raise ParseError(lineno, f"duplicate key {section}.{key}")
        try:
            raw[(section, key)] = (json.loads(value), lineno)
        except json.JSONDecodeError as exc:
            raise ParseError(lineno, f"value of {key!r} is not JSON: {exc.msg}") from None
    return raw


def _number(name, v, integer=False, positive=False, allow_none=False):
    if v is None and allow_none:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValidationError(name, f"expected a number, got {v!r}")
    if integer and (not float(v).is_integer()):
        raise ValidationError(name, f"expected an integer, got {v!r}")
    if not math.isfinite(v):
        raise ValidationError(name, "must be finite")
    if positive and v <= 0:
        raise ValidationError(name, f"must be positive, got {v!r}")
    return int(v) if integer else float(v)


def _number_list(name, v, integer=False, allow_none=False):
    if v is None and allow_none:
        return None
    if not isinstance(v, list) or not v:
        raise ValidationError(name, "expected a nonempty list")
    return tuple(_number(name, x, integer=integer) for x in v)


def _bool(name, v):
    if not isinstance(v, bool):
        raise ValidationError(name, f"expected true or false, got {v!r}")
    return v


def _convert(values: dict) -> dict:
    out = {}
    out["radius"] = _number("radius", values["radius"], positive=True)
    out["n"] = _number("n", values["n"], integer=True)
    graded = values["graded"]
    if isinstance(graded, bool):
        graded = DEFAULT_GRADING if graded else 0.0
    out["graded"] = _number("graded", graded)
    out["lambdas"] = _number_list("lambdas", values["lambdas"])
    beta = values["beta"]
    if not isinstance(beta, list) or not all(isinstance(r, list) for r in beta):
        raise ValidationError("beta", "expected a list of rows")
    out["beta"] = tuple(_number_list("beta", row) for row in beta)
    out["groups"] = _number_list("groups", values["groups"], integer=True)
    out["limit_system"] = _bool("limit_system", values["limit_system"])
    out["step"] = _number("step", values["step"], positive=True)
    out["tol"] = _number("tol", values["tol"], positive=True)
    out["max_iter"] = _number("max_iter", values["max_iter"], integer=True, positive=True)
    out["restarts"] = _number("restarts", values["restarts"], integer=True, positive=True)
    out["seed"] = _number("seed", values["seed"], integer=True)
    out["gamma"] = _number_list("gamma", values["gamma"], integer=True, allow_none=True)
    eps = _number_list("eps", values["eps"], allow_none=True)
    if eps is not None and any(e <= 0 or e >= 1 for e in eps):
        raise ValidationError("eps", "every eps must lie in (0, 1)")
    out["eps"] = eps
    out["rho"] = _number("rho", values["rho"], positive=True, allow_none=True)
    out["mixed"] = _bool("mixed", values["mixed"])
    if not isinstance(values["dir"], str) or not values["dir"]:
        raise ValidationError("dir", "expected a nonempty string")
    out["dir"] = values["dir"]
    return out


def build_spec(config: ExperimentConfig) -> ProblemSpec:
    """ProblemSpec described by a config; structural errors become ValidationError."""
    try:
        grid = make_grid(config.radius, config.n, config.graded)
    except HypothesisError as exc:
        raise ValidationError("grid", str(exc)) from None
    B = np.array(config.beta, dtype=float)
    d = len(config.lambdas)
    if B.shape != (d, d):
        raise ValidationError("beta", f"expected a {d}x{d} matrix, got shape {B.shape}")
    try:
        B = algebra.as_coupling_matrix(B)
    except HypothesisError as exc:
        raise ValidationError("beta", str(exc)) from None
    try:
        decomp = algebra.make_decomposition(config.groups, d)
    except HypothesisError as exc:
        raise ValidationError("groups", str(exc)) from None
    try:
        spec = ProblemSpec(grid, config.lambdas, B, decomp, limit_system=config.limit_system)
    except HypothesisError as exc:
        raise ValidationError("lambdas", str(exc)) from None
    if config.gamma is not None and (
        len(set(config.gamma)) != len(config.gamma)
        or any(not 0 <= h < spec.m for h in config.gamma)
    ):
        raise ValidationError("gamma", f"expected distinct group indices in [0, {spec.m})")
    return spec


def parse_config(text: str, validate: bool = True) -> ExperimentConfig:
    """Parse and validate a config, filling defaults and recording provenance."""
    raw = _tokenize(text)
    values, provenance = {}, {}
    for section, keys in SCHEMA.items():
        for key, default in keys.items():
            if (section, key) in raw:
                values[key] = raw[(section, key)][0]
                provenance[f"{section}.{key}"] = "config"
            elif default is _REQUIRED:
                raise ValidationError(key, f"missing required key {section}.{key}")
            else:
                values[key] = default
                provenance[f"{section}.{key}"] = "default"
    config = ExperimentConfig(**_convert(values), provenance=provenance)
    if validate:
        build_spec(config)
    return config


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
