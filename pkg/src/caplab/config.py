"""Job configuration: JSON schema, validation, and object construction.

A job file is a single JSON object.  Keys (see README for the full schema):

    task           "analyze" | "capacity" | "table" | "sweep" | "verify"
    mode           "intrinsic" | "extrinsic" (default: intrinsic when no
                   bounds are given, extrinsic otherwise)
    m, n, p, rho   constellation numbers (n defaults to m)
    R              outer radius, a number or the string "inf"
    warping        {"type": "space_form", "b": -1.0}
                   or {"type": "expression", "formula": "sinh(r)"}
    bounds         {"g": "1", "h": "0", "lambda": "0"} (expression strings)
    boundary_flux  positive number (extrinsic lower bounds only)
    lower_limit    weight normalization radius (default rho)
    sweep          {"m": [...], "p": [...], "b": [...], "h0": [...],
                    "lambda0": [...]}
    numerics       tolerance overrides, see Numerics defaults
    output         artifact path (CSV or JSON depending on task)

All expressions are parsed at load time so syntax errors surface
immediately, with a JSON-pointer to the offending field.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Optional

from . import expressions as ex
from .constellation import Annulus, Bounds, Constellation
from .errors import (
    CaplabError,
    ConfigError,
    ExpressionSyntaxError,
    InvalidWarping,
    UnknownIdentifier,
)
from .models import ExpressionWarping, ModelSpace, SpaceForm, WarpingFunction, validate_custom_warping

__all__ = ["Numerics", "JobConfig", "load_config", "parse_config"]

TASKS = ("analyze", "capacity", "table", "sweep", "verify")

_TOP_KEYS = {
    "task", "mode", "m", "n", "p", "rho", "R", "warping", "bounds",
    "boundary_flux", "lower_limit", "sweep", "numerics", "output",
}


@dataclass(frozen=True)
class Numerics:
    rel_tol: float = 1e-10
    grid: int = 129
    balance_grid: int = 4096
    tail_doublings: int = 20
    max_subdivisions: int = 10**6
    oracle_points: int = 2000


@dataclass(frozen=True)
class JobConfig:
    task: str
    mode: str = "intrinsic"
    m: int = 0
    n: int = 0
    p: float = math.nan
    rho: float = math.nan
    R: float = math.inf
    warping: Optional[WarpingFunction] = None
    bounds: Optional[Bounds] = None
    boundary_flux: Optional[float] = None
    lower_limit: Optional[float] = None
    sweep: Optional[dict] = None
    numerics: Numerics = field(default_factory=Numerics)
    output: Optional[str] = None

    def constellation(self) -> Constellation:
        if self.warping is None:
            raise ConfigError("/warping", "this task needs a warping function")
        bounds = self.bounds if self.bounds is not None else Bounds.intrinsic()
        try:
            return Constellation(
                m=self.m, n=self.n, p=self.p,
                model=ModelSpace(self.m, self.warping),
                bounds=bounds, rho=self.rho,
            )
        except ValueError as exc:
            raise ConfigError("", str(exc)) from exc

    def annulus(self) -> Annulus:
        try:
            return Annulus(self.rho, self.R)
        except ValueError as exc:
            raise ConfigError("/R", str(exc)) from exc


def _require(data: dict, key: str, kind, pointer: str):
    if key not in data:
        raise ConfigError(f"{pointer}/{key}", "missing required key")
    value = data[key]
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{pointer}/{key}", f"expected a number, got {value!r}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{pointer}/{key}", f"expected an integer, got {value!r}")
        return value
    if not isinstance(value, kind):
        raise ConfigError(f"{pointer}/{key}", f"expected {kind.__name__}, got {value!r}")
    return value


def _parse_expression(text: Any, pointer: str) -> ex.RadialExpr:
    if not isinstance(text, str):
        raise ConfigError(pointer, f"expected an expression string, got {text!r}")
    try:
        return ex.parse(text)
    except (ExpressionSyntaxError, UnknownIdentifier) as exc:
        raise ConfigError(pointer, str(exc)) from exc


def _parse_warping(data: Any, r_max: float) -> WarpingFunction:
    if not isinstance(data, dict):
        raise ConfigError("/warping", "expected an object")
    kind = data.get("type")
    if kind == "space_form":
        b = _require(data, "b", float, "/warping")
        return SpaceForm(b)
    if kind == "expression":
        expr = _parse_expression(data.get("formula"), "/warping/formula")
        warping = ExpressionWarping(expr)
        try:
            validate_custom_warping(warping, r_max=min(r_max, 10.0))
        except InvalidWarping as exc:
            raise ConfigError("/warping/formula", str(exc)) from exc
        return warping
    raise ConfigError("/warping/type", f"expected 'space_form' or 'expression', got {kind!r}")


def _parse_bounds(data: Any) -> Bounds:
    if not isinstance(data, dict):
        raise ConfigError("/bounds", "expected an object")
    extra = set(data) - {"g", "h", "lambda"}
    if extra:
        raise ConfigError(f"/bounds/{sorted(extra)[0]}", "unknown key")
    g = _parse_expression(data.get("g", "1"), "/bounds/g")
    h = _parse_expression(data.get("h", "0"), "/bounds/h")
    lam = _parse_expression(data.get("lambda", "0"), "/bounds/lambda")
    return Bounds(g, h, lam)


def _parse_numerics(data: Any) -> Numerics:
    if data is None:
        return Numerics()
    if not isinstance(data, dict):
        raise ConfigError("/numerics", "expected an object")
    defaults = Numerics()
    known = {f: getattr(defaults, f) for f in defaults.__dataclass_fields__}
    values = {}
    for key, val in data.items():
        if key not in known:
            raise ConfigError(f"/numerics/{key}", "unknown key")
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ConfigError(f"/numerics/{key}", f"expected a number, got {val!r}")
        values[key] = type(known[key])(val)
    num = Numerics(**values)
    if num.rel_tol < 1e-13:
        raise ConfigError("/numerics/rel_tol", "must be at least 1e-13")
    if num.grid < 2 or num.balance_grid < 2:
        raise ConfigError("/numerics/grid", "grids need at least 2 points")
    return num


def _parse_sweep(data: Any) -> dict:
    if not isinstance(data, dict):
        raise ConfigError("/sweep", "expected an object")
    axes = {}
    for key in ("m", "p", "b", "h0", "lambda0"):
        if key not in data:
            raise ConfigError(f"/sweep/{key}", "missing sweep axis")
        vals = data[key]
        if not isinstance(vals, list) or not vals:
            raise ConfigError(f"/sweep/{key}", "sweep axis must be a non-empty list")
        for i, v in enumerate(vals):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"/sweep/{key}/{i}", f"expected a number, got {v!r}")
        axes[key] = [float(v) for v in vals]
    extra = set(data) - set(axes)
    if extra:
        raise ConfigError(f"/sweep/{sorted(extra)[0]}", "unknown key")
    for i, m in enumerate(axes["m"]):
        if m != int(m) or m < 2:
            raise ConfigError(f"/sweep/m/{i}", "dimensions must be integers >= 2")
    for i, p in enumerate(axes["p"]):
        if p < 2.0:
            raise ConfigError(f"/sweep/p/{i}", "hyperbolicity verdicts need p >= 2")
    for i, b in enumerate(axes["b"]):
        if b >= 0.0:
            raise ConfigError(f"/sweep/b/{i}", "sweep curvatures must be negative")
    return axes


def parse_config(data: Any) -> JobConfig:
    """Validate a decoded JSON object and build the typed job description."""
    if not isinstance(data, dict):
        raise ConfigError("", "top level must be a JSON object")
    extra = set(data) - _TOP_KEYS
    if extra:
        raise ConfigError(f"/{sorted(extra)[0]}", "unknown key")
    task = data.get("task")
    if task not in TASKS:
        raise ConfigError("/task", f"expected one of {', '.join(TASKS)}, got {task!r}")
    numerics = _parse_numerics(data.get("numerics"))
    output = data.get("output")
    if output is not None and not isinstance(output, str):
        raise ConfigError("/output", "expected a path string")

    if task == "verify":
        return JobConfig(task=task, numerics=numerics, output=output)

    if task == "sweep":
        axes = _parse_sweep(data.get("sweep") if "sweep" in data else None)
        rho = float(data.get("rho", 1.0))
        if rho <= 0.0:
            raise ConfigError("/rho", "rho must be positive")
        return JobConfig(task=task, rho=rho, sweep=axes, numerics=numerics, output=output)

    m = _require(data, "m", int, "")
    if m < 2:
        raise ConfigError("/m", "submanifold dimension must be at least 2")
    n = data.get("n", m)
    if isinstance(n, bool) or not isinstance(n, int):
        raise ConfigError("/n", f"expected an integer, got {n!r}")
    if n < m:
        raise ConfigError("/n", "ambient dimension must be at least m")
    p = _require(data, "p", float, "")
    rho = _require(data, "rho", float, "")
    if rho <= 0.0:
        raise ConfigError("/rho", "rho must be positive")

    raw_R = data.get("R", "inf" if task == "analyze" else None)
    if raw_R is None:
        raise ConfigError("/R", "this task needs an outer radius")
    if raw_R == "inf":
        R = math.inf
    elif isinstance(raw_R, (int, float)) and not isinstance(raw_R, bool):
        R = float(raw_R)
    else:
        raise ConfigError("/R", f"expected a number or 'inf', got {raw_R!r}")
    if R <= rho:
        raise ConfigError("/R", "outer radius must exceed rho")
    if task in ("capacity", "table") and math.isinf(R):
        if task == "table":
            raise ConfigError("/R", "tables need a finite outer radius")

    horizon = R if math.isfinite(R) else rho * 2.0**numerics.tail_doublings
    warping = _parse_warping(data.get("warping"), horizon) if "warping" in data else None
    if warping is None:
        raise ConfigError("/warping", "missing required key")
    if isinstance(warping, SpaceForm) and warping.b > 0.0:
        limit = warping.sup_radius
        if math.isfinite(R) and R >= limit:
            raise ConfigError("/R", f"outer radius must stay below {limit!r} for b > 0")

    bounds = _parse_bounds(data["bounds"]) if "bounds" in data else None
    mode = data.get("mode")
    if mode is None:
        mode = "extrinsic" if bounds is not None and not bounds.trivial else "intrinsic"
    if mode not in ("intrinsic", "extrinsic"):
        raise ConfigError("/mode", f"expected 'intrinsic' or 'extrinsic', got {mode!r}")
    if mode == "intrinsic":
        if bounds is not None and not bounds.trivial:
            raise ConfigError("/bounds", "intrinsic mode requires g = 1, h = 0, lambda = 0")
        if n != m:
            raise ConfigError("/n", "intrinsic mode requires n = m")
    if bounds is not None:
        try:
            bounds.validate_g(rho, min(horizon, warping.sup_radius * (1 - 1e-9)))
        except ValueError as exc:
            raise ConfigError("/bounds/g", str(exc)) from exc
        except CaplabError as exc:
            raise ConfigError("/bounds", str(exc)) from exc

    if p < 2.0:
        if task != "capacity":
            raise ConfigError(
                "/p", "hyperbolicity verdicts need p >= 2; exact model capacities "
                "for 1 < p < 2 are available through the capacity task"
            )
        if p <= 1.0:
            raise ConfigError("/p", "exponent p must exceed 1")
        if mode != "intrinsic":
            raise ConfigError("/p", "p < 2 capacities are only defined intrinsically")

    flux = data.get("boundary_flux")
    if flux is not None:
        if isinstance(flux, bool) or not isinstance(flux, (int, float)) or flux <= 0.0:
            raise ConfigError("/boundary_flux", f"expected a positive number, got {flux!r}")
        flux = float(flux)

    lower = data.get("lower_limit")
    if lower is not None:
        if isinstance(lower, bool) or not isinstance(lower, (int, float)) or lower <= 0.0:
            raise ConfigError("/lower_limit", f"expected a positive number, got {lower!r}")
        lower = float(lower)

    return JobConfig(
        task=task, mode=mode, m=m, n=n, p=p, rho=rho, R=R,
        warping=warping, bounds=bounds, boundary_flux=flux,
        lower_limit=lower, numerics=numerics, output=output,
    )


def load_config(path: str) -> JobConfig:
    """Read and validate a JSON job file."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as exc:
        raise ConfigError("", f"cannot read {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"invalid JSON: {exc}") from exc
    return parse_config(data)
