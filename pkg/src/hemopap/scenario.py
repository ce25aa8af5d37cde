"""Scenario files: one model instance plus its range, overrides and numerics.

The format is YAML with four top-level blocks::

    model:
      m: 2
      n: 2
      a: "sum(const(0.38), scale(1/400, abs(sum(sin(1), sin(pi)))), bump_train(pi/800))"
      b: ["sum(const(1), rational_decay(0.01))"]
      tau: ["const(1)"]
      sigma: "const(0)"            # optional
      harvest: {c: "const(0.01)", shape: rational}   # optional
      L: 0.01                      # optional
    range: {k: 2, M: 3.29}         # k_tilde optional
    overrides: {H_plus: 0.005}     # optional: H_plus, H_minus, L
    numerics: {h: 0.01, horizon: 400, grid_step: 0.05, T_trunc: 60, tol: 1.0e-6, window: [0, 100]}

Coefficients use the expression syntax of :func:`hemopap.pap_funcs.parse_pap`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path
from typing import Any, Optional

import yaml

from .errors import HemopapError, SpecError
from .model import HARVEST_SHAPES, HarvestSpec, ModelSpec, RangeParams
from .pap_funcs import ExpressionError, PapFunction, parse_pap

BUILTIN = ("example6", "constant", "extinction", "decay")

_SCHEMA: dict[str, Any] = {
    "model": {"m": None, "n": None, "a": None, "b": None, "tau": None, "sigma": None, "harvest": {"c": None, "shape": None}, "L": None},
    "range": {"k": None, "M": None, "k_tilde": None},
    "overrides": {"H_plus": None, "H_minus": None, "L": None},
    "numerics": {"h": None, "horizon": None, "grid_step": None, "T_trunc": None, "tol": None, "window": None},
}
_REQUIRED = ("model.m", "model.n", "model.a", "model.b", "model.tau", "range.k", "range.M")


class ScenarioError(HemopapError, ValueError):
    def __init__(self, message: str, key: str = "", line: Optional[int] = None):
        prefix = f"line {line}: " if line else ""
        super().__init__(prefix + message)
        self.key = key
        self.line = line


@dataclass(frozen=True)
class Numerics:
    h: float = 0.01
    horizon: float = 400.0
    grid_step: float = 0.05
    T_trunc: Optional[float] = None
    tol: float = 1e-6
    window: tuple[float, float] = (0.0, 100.0)


@dataclass(frozen=True)
class Scenario:
    model: ModelSpec
    range: RangeParams
    overrides: dict = field(default_factory=dict)
    numerics: Numerics = field(default_factory=Numerics)

    def hypothesis_kwargs(self) -> dict:
        return dict(self.overrides)


# ---------------------------------------------------------------------------
# parsing


def _line_map(node, prefix="", out=None) -> dict[str, int]:
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            path = f"{prefix}.{k.value}" if prefix else str(k.value)
            out[path] = k.start_mark.line + 1
            _line_map(v, path, out)
    return out


def _check_keys(data, schema, prefix, lines):
    if not isinstance(data, dict):
        raise ScenarioError(f"{prefix or 'document'} must be a mapping", prefix, lines.get(prefix))
    for key, value in data.items():
        path = f"{prefix}.{key}" if prefix else str(key)
        if key not in schema:
            raise ScenarioError(f"unknown key {path!r}", path, lines.get(path))
        if isinstance(schema[key], dict) and value is not None:
            _check_keys(value, schema[key], path, lines)


def _get(data: dict, path: str):
    cur: Any = data
    for part in path.split("."):
        if not isinstance(cur, dict) or part not in cur:
            return None
        cur = cur[part]
    return cur


def _number(data, path, lines, *, positive=False, default=None):
    v = _get(data, path)
    if v is None:
        if default is not None or path not in _REQUIRED:
            return default
        raise ScenarioError(f"missing required key {path!r}", path)
    try:
        x = float(v)
    except (TypeError, ValueError):
        raise ScenarioError(f"{path} must be a number, got {v!r}", path, lines.get(path)) from None
    if not math.isfinite(x) or (positive and not x > 0):
        raise ScenarioError(f"{path} must be a {'positive ' if positive else ''}finite number, got {v!r}", path, lines.get(path))
    return x


def _pap(data, path, lines, default=None) -> PapFunction:
    v = _get(data, path)
    if v is None:
        if default is not None:
            return default
        raise ScenarioError(f"missing required key {path!r}", path)
    try:
        return parse_pap(str(v))
    except ExpressionError as exc:
        raise ScenarioError(f"{path}: {exc}", path, lines.get(path)) from None


def _pap_list(data, path, lines) -> list[PapFunction]:
    v = _get(data, path)
    if v is None:
        raise ScenarioError(f"missing required key {path!r}", path)
    items = v if isinstance(v, list) else [v]
    out = []
    for i, item in enumerate(items):
        try:
            out.append(parse_pap(str(item)))
        except ExpressionError as exc:
            raise ScenarioError(f"{path}[{i}]: {exc}", path, lines.get(path)) from None
    return out


def parse_scenario_text(text: str) -> Scenario:
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ScenarioError(f"parse error: {getattr(exc, 'problem', exc)}", line=mark.line + 1 if mark else None) from None
    if node is None or data is None:
        raise ScenarioError("parse error: empty scenario file")
    lines = _line_map(node)
    _check_keys(data, _SCHEMA, "", lines)
    for block in ("model", "range"):
        if _get(data, block) is None:
            raise ScenarioError(f"missing required block {block!r}", block)

    shape = _get(data, "model.harvest.shape")
    if shape is not None and shape not in HARVEST_SHAPES:
        raise ScenarioError(f"model.harvest.shape must be one of {HARVEST_SHAPES}", "model.harvest.shape", lines.get("model.harvest.shape"))
    if _get(data, "model.harvest") is None:
        harvest = HarvestSpec.none()
    else:
        shape = shape or "rational"
        c = _pap(data, "model.harvest.c", lines, default=PapFunction.constant(0.0) if shape == "none" else None)
        try:
            harvest = HarvestSpec(c, shape)
        except SpecError as exc:
            raise ScenarioError(str(exc), "model.harvest.c", lines.get("model.harvest.c")) from None
    try:
        model = ModelSpec(
            m=_number(data, "model.m", lines),
            n=_number(data, "model.n", lines),
            a=_pap(data, "model.a", lines),
            b=_pap_list(data, "model.b", lines),
            tau=_pap_list(data, "model.tau", lines),
            sigma=_pap(data, "model.sigma", lines, default=PapFunction.constant(0.0)),
            harvest=harvest,
            L=_number(data, "model.L", lines, default=0.0),
        )
    except SpecError as exc:
        raise ScenarioError(f"model: {exc}", "model", lines.get("model")) from None

    k = _number(data, "range.k", lines, positive=True)
    M = _number(data, "range.M", lines, positive=True)
    if not k < M:
        raise ScenarioError(f"range.k must be below range.M (k = {k!r}, M = {M!r})", "range.k", lines.get("range.k"))
    rng = RangeParams(k, M, _number(data, "range.k_tilde", lines, positive=True))

    overrides = {}
    for key in ("H_plus", "H_minus", "L"):
        v = _number(data, f"overrides.{key}", lines)
        if v is not None:
            if v < 0:
                raise ScenarioError(f"overrides.{key} must be non-negative", f"overrides.{key}", lines.get(f"overrides.{key}"))
            overrides[key] = v

    d = Numerics()
    window = _get(data, "numerics.window")
    if window is None:
        window = d.window
    else:
        if not (isinstance(window, list) and len(window) == 2):
            raise ScenarioError("numerics.window must be a two-element list [W0, W1]", "numerics.window", lines.get("numerics.window"))
        try:
            window = (float(window[0]), float(window[1]))
        except (TypeError, ValueError):
            raise ScenarioError("numerics.window entries must be numbers", "numerics.window", lines.get("numerics.window")) from None
        if not window[1] > window[0]:
            raise ScenarioError("numerics.window must satisfy W0 < W1", "numerics.window", lines.get("numerics.window"))
    numerics = Numerics(
        h=_number(data, "numerics.h", lines, positive=True, default=d.h),
        horizon=_number(data, "numerics.horizon", lines, positive=True, default=d.horizon),
        grid_step=_number(data, "numerics.grid_step", lines, positive=True, default=d.grid_step),
        T_trunc=_number(data, "numerics.T_trunc", lines, positive=True),
        tol=_number(data, "numerics.tol", lines, positive=True, default=d.tol),
        window=window,
    )
    return Scenario(model, rng, overrides, numerics)


def parse_scenario(path) -> Scenario:
    """Load and validate a scenario file, or a built-in by name (e.g. ``example6``)."""
    p = Path(path)
    if not p.exists():
        name = p.name[:-4] if p.name.endswith(".scn") else p.name
        if name in BUILTIN and p.parent == Path("."):
            return parse_scenario_text(builtin_text(name))
        raise ScenarioError(f"no such scenario file: {path}")
    return parse_scenario_text(p.read_text(encoding="utf-8"))


def builtin_text(name: str) -> str:
    return resources.files("hemopap").joinpath("scenarios", f"{name}.scn").read_text(encoding="utf-8")


def load_builtin(name: str) -> Scenario:
    return parse_scenario_text(builtin_text(name))


# ---------------------------------------------------------------------------
# serialisation


def to_dict(sc: Scenario) -> dict:
    spec = sc.model
    model: dict[str, Any] = {
        "m": spec.m,
        "n": spec.n,
        "a": spec.a.to_text(),
        "b": [f.to_text() for f in spec.b],
        "tau": [f.to_text() for f in spec.tau],
        "sigma": spec.sigma.to_text(),
        "harvest": {"c": spec.harvest.c.to_text(), "shape": spec.harvest.shape},
        "L": spec.L,
    }
    rng: dict[str, Any] = {"k": sc.range.k, "M": sc.range.M}
    if sc.range.k_tilde is not None:
        rng["k_tilde"] = sc.range.k_tilde
    num = {f.name: getattr(sc.numerics, f.name) for f in fields(Numerics)}
    num["window"] = list(num["window"])
    if num["T_trunc"] is None:
        del num["T_trunc"]
    out = {"model": model, "range": rng, "numerics": num}
    if sc.overrides:
        out["overrides"] = dict(sc.overrides)
    return out


def serialize(sc: Scenario) -> str:
    return yaml.safe_dump(to_dict(sc), sort_keys=False, default_flow_style=None, width=1000)
